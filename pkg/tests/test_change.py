import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import degree_selection, graph_with_degrees
from pocsim.change import (
    ChangeEvent,
    EffortParams,
    RelaxedLinear,
    SelectionDistribution,
    StrictHeteroscedastic,
    StrictIndependent,
    sample_change_event,
    sample_events,
    sample_noise,
    sample_target,
)
from pocsim.errors import InvalidDistributionError, InvalidModelError
from pocsim.graph import DependencyGraph
from pocsim.moments import bootstrap_se, rowwise_cov, sample_cov
from pocsim.rng import replication_stream, stream


def enumerate_degree_law(degrees, weights):
    """Exact (mean, variance) with rational arithmetic."""
    w = [Fraction(x) for x in weights]
    mu = sum(p * d for p, d in zip(w, degrees))
    var = sum(p * d * d for p, d in zip(w, degrees)) - mu * mu
    return mu, var


AB = DependencyGraph.from_edges("ab")


# -- selection ---------------------------------------------------------------


def test_point_mass_always_selected(rng):
    sel = SelectionDistribution.point_mass("a")
    assert {sample_target(AB, sel, rng) for _ in range(50)} == {"a"}


def test_uniform_frequencies(rng):
    sel = SelectionDistribution.uniform(AB)
    idx = sample_events(AB, sel, EffortParams(1.0), StrictIndependent(0), 0, rng, 10**5).targets
    freq = idx.count("a") / 10**5
    assert abs(freq - 0.5) <= 0.01


@pytest.mark.parametrize(
    "weights",
    [{"a": 0.5, "b": 0.3}, {"a": -0.1, "b": 1.1}, {"a": float("nan"), "b": 1.0}, {}],
)
def test_invalid_distributions(weights):
    with pytest.raises(InvalidDistributionError):
        SelectionDistribution(weights)


def test_unknown_node_in_selection(rng):
    with pytest.raises(InvalidDistributionError):
        sample_target(AB, SelectionDistribution({"z": 1.0}), rng)


def test_weight_tolerance_is_1e9():
    SelectionDistribution({"a": 0.5, "b": 0.5 + 5e-10})
    with pytest.raises(InvalidDistributionError):
        SelectionDistribution({"a": 0.5, "b": 0.5 + 5e-9})


def test_degree_proportional():
    g, nodes = graph_with_degrees([1, 3])
    sel = SelectionDistribution.degree_proportional(g)
    assert sel.weights["n0"] == pytest.approx(0.25)
    assert sel.weights["n1"] == pytest.approx(0.75)
    assert "s0" not in sel.weights or sel.weights["s0"] == 0.0
    with pytest.raises(InvalidDistributionError):
        SelectionDistribution.degree_proportional(AB)
    assert SelectionDistribution.degree_proportional(AB, offset=1.0).weights == {"a": 0.5, "b": 0.5}


# -- noise ---------------------------------------------------------------------


def test_zero_noise_is_zero(rng):
    assert all(sample_noise(StrictIndependent(0.0), 3, None, rng) == 0.0 for _ in range(20))


def test_strict_independent_mean(rng):
    z = np.array([sample_noise(StrictIndependent(2.0), 1, None, rng) for _ in range(1000)])
    assert np.std(z) > 1.5
    big = sample_events(AB, SelectionDistribution.uniform(AB), EffortParams(1.0), StrictIndependent(2.0), 0, rng, 10**5)
    assert abs(big.residuals.mean()) <= 3 * 2 / math.sqrt(10**5)


def test_relaxed_linear_degenerate(rng):
    assert all(sample_noise(RelaxedLinear(1.0, 0.0), 3, 1.0, rng) == 2.0 for _ in range(10))


def test_relaxed_needs_mu(rng):
    with pytest.raises(InvalidModelError):
        sample_noise(RelaxedLinear(1.0, 0.0), 3, None, rng)


@pytest.mark.parametrize(
    "factory",
    [lambda: StrictIndependent(-1), lambda: RelaxedLinear(float("inf")), lambda: RelaxedLinear(1, -2),
     lambda: StrictHeteroscedastic({-1: 1.0}), lambda: StrictHeteroscedastic({1: -1.0})],
)
def test_invalid_noise_models(factory):
    with pytest.raises(InvalidModelError):
        factory()


def test_heteroscedastic_lookup():
    n = StrictHeteroscedastic({0: 1.0, 2: 3.0}, default=0.5)
    assert n.sigma(2) == 3.0 and n.sigma(7) == 0.5
    assert list(n.sigmas(np.array([0, 7, 2]))) == [1.0, 0.5, 3.0]
    with pytest.raises(InvalidModelError):
        StrictHeteroscedastic({0: 1.0}).sigma(1)


@pytest.mark.parametrize("alpha, beta", [(0.0, 1.0), (-1.0, 0.0), (1.0, -0.5), (float("nan"), 0.0)])
def test_invalid_effort_params(alpha, beta):
    with pytest.raises(InvalidModelError):
        EffortParams(alpha, beta)


# -- events --------------------------------------------------------------------


def test_degenerate_event_effort(rng):
    g, nodes = graph_with_degrees([3])
    ev = sample_change_event(g, SelectionDistribution.point_mass("n0"), EffortParams(2, 1), StrictIndependent(0), 0, rng)
    assert ev == ChangeEvent(0, "n0", 3, 7.0, 0.0)


def test_mean_effort_uniform_degrees(rng):
    degrees = [0, 1, 2]
    mu, var = enumerate_degree_law(degrees, [Fraction(1, 3)] * 3)
    assert (mu, var) == (1, Fraction(2, 3))
    g, nodes = graph_with_degrees(degrees)
    batch = sample_events(g, degree_selection(nodes), EffortParams(1, 0), StrictIndependent(0), 0, rng, 10**5)
    assert abs(batch.efforts.mean() - float(mu)) <= 3 * math.sqrt(float(var)) / math.sqrt(10**5)


def test_strict_covariance_is_zero_within_bootstrap(rng):
    g, nodes = graph_with_degrees([0, 1, 4, 6])
    batch = sample_events(g, degree_selection(nodes), EffortParams(1, 0), StrictIndependent(1.5), 0, rng, 10**5)
    c = sample_cov(batch.degrees, batch.residuals)
    se = bootstrap_se(rowwise_cov, batch.degrees.astype(float), batch.residuals, rng=stream(1, 3), n_boot=100)
    assert abs(c) <= 3 * se


@pytest.mark.parametrize("noise", [StrictIndependent(2.0), StrictHeteroscedastic({0: 0.5, 2: 2.0, 5: 4.0})])
def test_strict_residual_mean_zero_per_degree_class(noise):
    g, nodes = graph_with_degrees([0, 2, 5])
    batch = sample_events(g, degree_selection(nodes), EffortParams(1, 0), noise, 0, stream(9, 0), 3 * 10**5)
    for d in (0, 2, 5):
        r = batch.residuals[batch.degrees == d]
        assert len(r) > 9 * 10**4
        assert abs(r.mean()) <= 3 * r.std(ddof=1) / math.sqrt(len(r))


def test_relaxed_covariance_converges(rng):
    degrees = [0, 1, 4, 6]
    _, var = enumerate_degree_law(degrees, [Fraction(1, 4)] * 4)
    gamma = 0.7
    g, nodes = graph_with_degrees(degrees)
    batch = sample_events(g, degree_selection(nodes), EffortParams(1, 0), RelaxedLinear(gamma, 1.0), 0, rng, 10**5)
    c = sample_cov(batch.degrees, batch.residuals)
    se = bootstrap_se(rowwise_cov, batch.degrees.astype(float), batch.residuals, rng=stream(2, 3), n_boot=100)
    assert abs(c - gamma * float(var)) <= 3 * se
    assert abs(batch.residuals.mean()) <= 3 * batch.residuals.std() / math.sqrt(10**5)


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(1e-3, 1e3),
    beta=st.floats(0, 1e3),
    sigma=st.floats(0, 50),
    gamma=st.floats(-5, 5),
    seed=st.integers(0, 2**32),
    relaxed=st.booleans(),
)
def test_effort_identity_is_bit_exact(alpha, beta, sigma, gamma, seed, relaxed):
    g, nodes = graph_with_degrees([0, 1, 3, 7])
    noise = RelaxedLinear(gamma, sigma) if relaxed else StrictIndependent(sigma)
    batch = sample_events(g, degree_selection(nodes), EffortParams(alpha, beta), noise, 0, stream(seed, 0), 50)
    for ev in batch.events():
        assert ev.effort == alpha * ev.degree_at_change + beta + ev.residual


def test_same_seed_same_stream():
    g, nodes = graph_with_degrees([0, 2, 5])
    args = (g, degree_selection(nodes), EffortParams(1.5, 0.5), StrictIndependent(1.0), 0)
    a = sample_events(*args, replication_stream(42, 0), 1000)
    b = sample_events(*args, replication_stream(42, 0), 1000)
    c = sample_events(*args, replication_stream(42, 1), 1000)
    assert a == b
    assert a != c

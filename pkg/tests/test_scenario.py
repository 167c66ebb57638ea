import json
import math

import numpy as np
import pytest

from pocsim.change import EffortParams, StrictIndependent
from pocsim.errors import InfeasibleKnobsError, InvalidDistributionError, ScenarioError, SimulationError, UnknownScenarioKindError
from pocsim.graph import DependencyGraph, GraphDelta
from pocsim.moments import (
    RegimeLabel,
    check_assumptions,
    poc_state,
    population_degree_moments,
    population_residual_moments,
    verify_theorem,
)
from pocsim.scenario import (
    Scenario,
    SelectionPolicy,
    StaticRule,
    generate_scenario,
    graph_path,
    population_path,
    run_simulation,
    scenario_from_mapping,
    trajectory_from_dict,
    trajectory_to_dict,
)

SMALL = {"horizon": 6, "events_per_step": 50}


def test_static_control_is_stationary():
    sc = generate_scenario("static_control", SMALL, seed=1)
    (tr,) = run_simulation(sc)
    assert all(d.delta_b == 0 and d.delta_u == 0 for d in tr.deltas)
    assert set(tr.regimes) == {RegimeLabel.STATIONARY}


@pytest.mark.parametrize("selection", ["uniform", "degree_proportional"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_regularizing_satisfies_a1_a2(selection, seed):
    sc = generate_scenario("regularizing", {"horizon": 20, "selection": selection, "new_nodes_per_step": 1}, seed)
    reps = check_assumptions(population_path(sc))
    assert len(reps) == 19
    assert all(r.a1_holds and r.a2_holds for r in reps)


def test_regularizing_actually_grows():
    sc = generate_scenario("regularizing", {"horizon": 10}, seed=4)
    graphs = graph_path(sc)
    assert all(len(b.edges) > len(a.edges) for a, b in zip(graphs, graphs[1:]))
    assert all(b.nodes >= a.nodes and b.edges >= a.edges for a, b in zip(graphs, graphs[1:]))


def test_noise_annealing_uncertainty_values():
    sc = generate_scenario("noise_annealing", {"horizon": 3, "sigma_schedule": [3, 2, 1], "alpha": 1.0}, seed=2)
    pop = population_path(sc)
    sd2 = pop[0].sigma_d2
    assert all(s.sigma_d2 == sd2 for s in pop)
    us = [poc_state(s, sc.params).uncertainty for s in pop]
    assert us == [sd2 + 9, sd2 + 4, sd2 + 1]
    assert us[0] > us[1] > us[2]


def test_covariance_annealing_drives_a4():
    sc = generate_scenario("covariance_annealing", {"horizon": 8}, seed=3)
    pop = population_path(sc)
    assert pop[0].cov_d_eps > 0 and pop[-1].cov_d_eps == 0
    reps = check_assumptions(pop)
    assert all(r.all_hold and r.a4_strict for r in reps)
    assert verify_theorem(pop, sc.params).confirmed == 7


@pytest.mark.parametrize("seed", [0, 5])
def test_heterogenizing_breaks_a2(seed):
    sc = generate_scenario("heterogenizing", {"horizon": 12}, seed)
    reps = check_assumptions(population_path(sc))
    assert not any(r.a2_holds for r in reps)


def test_unknown_kind_and_infeasible_knobs():
    with pytest.raises(UnknownScenarioKindError):
        generate_scenario("shrinking")
    with pytest.raises(InfeasibleKnobsError):
        generate_scenario("regularizing", {"min_initial_degree": 4, "target_degree": 2})
    with pytest.raises(InfeasibleKnobsError):
        generate_scenario("regularizing", {"n_nodes": 5, "max_initial_degree": 3, "target_degree": 40})
    with pytest.raises(InfeasibleKnobsError):
        generate_scenario("noise_annealing", {"horizon": 3, "sigma_schedule": [1, 2, 3]})
    with pytest.raises(InfeasibleKnobsError):
        generate_scenario("static_control", {"noise": "annealing"})
    with pytest.raises(InfeasibleKnobsError):
        generate_scenario("static_control", {"colour": "red"})


def test_replications_are_deterministic_and_distinct():
    sc = generate_scenario("regularizing", {"horizon": 5, "events_per_step": 200}, seed=9)
    a = run_simulation(sc, 2)
    b = run_simulation(sc, 2)
    assert a == b
    assert a[0].population == a[1].population
    assert not np.array_equal(a[0].events[0].efforts, a[1].events[0].efforts)


def test_workers_do_not_change_results():
    sc = generate_scenario("noise_annealing", {"horizon": 4, "events_per_step": 300}, seed=3)
    assert run_simulation(sc, 4, workers=1) == run_simulation(sc, 4, workers=3)


def _fixed_degree_scenario(**kw):
    g = DependencyGraph.from_edges(["hub", "a", "b", "c"], [("hub", "a"), ("hub", "b"), ("hub", "c")])
    base = dict(
        initial_graph=g,
        horizon=4,
        transitions=StaticRule(),
        selection_policy=SelectionPolicy("explicit", schedule=({"hub": 1.0},) * 4),
        params=EffortParams(2, 1),
        noise_schedule=StrictIndependent(0),
        events_per_step=100,
        seed=0,
    )
    base.update(kw)
    return Scenario(**base)


def test_zero_noise_degenerate_scenario():
    (tr,) = run_simulation(_fixed_degree_scenario())
    for batch in tr.events:
        assert set(batch.efforts.tolist()) == {7.0}
    assert all(s.sigma_eps2 == 0 for s in tr.empirical)


def test_single_event_per_step_has_no_empirical_series():
    (tr,) = run_simulation(_fixed_degree_scenario(events_per_step=1))
    assert tr.empirical is None and len(tr.events) == 4


def test_failing_step_is_named():
    bad = (GraphDelta(), GraphDelta(removed_nodes=("hub",)), GraphDelta())
    sc = _fixed_degree_scenario(transitions=bad)
    with pytest.raises(ScenarioError, match="transition 1 -> 2"):
        run_simulation(sc)
    sc = _fixed_degree_scenario(selection_policy=SelectionPolicy("explicit", schedule=({"hub": 1.0}, {"zz": 1.0}) * 2))
    with pytest.raises(InvalidDistributionError, match="t=1"):
        run_simulation(sc)


def test_sampling_failure_is_wrapped(monkeypatch):
    import pocsim.scenario as mod

    def boom(*a, **k):
        from pocsim.errors import InvalidModelError

        raise InvalidModelError("no")

    monkeypatch.setattr(mod, "sample_events", boom)
    with pytest.raises(SimulationError) as info:
        run_simulation(_fixed_degree_scenario(), 2)
    assert info.value.t == 0 and info.value.replication == 0


def test_population_state_equals_composition():
    sc = generate_scenario("covariance_annealing", {"horizon": 6, "selection": "degree_proportional"}, seed=8)
    (tr,) = run_simulation(sc)
    for t, (g, st_) in enumerate(zip(graph_path(sc), tr.states)):
        sel = sc.selection_policy.at(g, t)
        mu, sd2 = population_degree_moments(g, sel)
        se2, c = population_residual_moments(sc.noise_at(t), sd2)
        a = sc.params.alpha
        assert st_.burden == a * mu + sc.params.beta
        assert st_.uncertainty == a * a * sd2 + se2 + 2 * a * c


@pytest.mark.parametrize("kind", ["regularizing", "noise_annealing", "covariance_annealing", "static_control"])
def test_theorem_holds_on_constructed_scenarios(kind):
    knobs = {"horizon": 15}
    if kind == "regularizing":
        knobs["noise"] = "annealing"
    sc = generate_scenario(kind, knobs, seed=21)
    rep = verify_theorem(population_path(sc), sc.params)
    assert rep.ok and rep.vacuous == 0


def test_empirical_tracks_population():
    sc = generate_scenario("regularizing", {"horizon": 50, "events_per_step": 1000, "noise": "annealing"}, seed=13)
    trs = run_simulation(sc, 20)
    inside = total = 0
    for tr in trs:
        for batch, st_ in zip(tr.events, tr.states):
            e = batch.efforts
            n = len(e)
            var_hat = e.var(ddof=1)
            m4 = np.mean((e - e.mean()) ** 4)
            se = math.sqrt(max(m4 - var_hat**2 * (n - 3) / (n - 1), 0) / n)
            inside += abs(var_hat - st_.uncertainty) <= 3 * se
            total += 1
    assert inside / total >= 0.95


def test_trajectory_serialization_round_trip():
    sc = generate_scenario("covariance_annealing", {"horizon": 4, "events_per_step": 30}, seed=6)
    (tr,) = run_simulation(sc)
    again = trajectory_from_dict(json.loads(json.dumps(trajectory_to_dict(tr))))
    assert again == tr
    assert again.change_events() == tr.change_events()


def test_explicit_scenario_from_mapping():
    cfg = {
        "kind": "explicit",
        "seed": 3,
        "horizon": 3,
        "events_per_step": 20,
        "alpha": 2.0,
        "beta": 1.0,
        "graph": {"nodes": ["a", "b"], "edges": [["a", "b"]]},
        "transitions": [{"added_nodes": ["c"], "added_edges": [["a", "c"]]}, {}],
        "noise": [
            {"mode": "strict_independent", "sigma_eps": 1.0},
            {"mode": "strict_heteroscedastic", "sigma_by_degree": {"0": 0.5, "1": 0.5, "2": 0.5}},
            {"mode": "relaxed_linear", "gamma": 0.0, "eta_sigma": 0.1},
        ],
    }
    sc = scenario_from_mapping(cfg)
    graphs = graph_path(sc)
    assert [len(g) for g in graphs] == [2, 3, 3]
    (tr,) = run_simulation(sc)
    assert len(tr.empirical) == 3
    with pytest.raises(ScenarioError):
        scenario_from_mapping({"kind": "explicit", "horizon": 2})
    with pytest.raises(ScenarioError):
        scenario_from_mapping({"seed": 1})


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        _fixed_degree_scenario(horizon=0)
    with pytest.raises(ScenarioError):
        _fixed_degree_scenario(noise_schedule=(StrictIndependent(0),))
    with pytest.raises(ScenarioError):
        _fixed_degree_scenario(transitions=())
    with pytest.raises(ScenarioError):
        SelectionPolicy("explicit")

"""Change-event sampling: target selection, noise laws and the effort model.

A change event picks a target ``X`` from a selection distribution over the
current graph and costs ``alpha * d(X) + beta + eps``. The three noise laws
differ in how ``eps`` relates to the target's degree:

* :class:`StrictIndependent`   eps ~ N(0, sigma_eps^2), independent of X
* :class:`StrictHeteroscedastic` eps ~ N(0, sigma(d(X))^2)
* :class:`RelaxedLinear`       eps = gamma * (d(X) - mu) + eta, eta ~ N(0, eta_sigma^2)

The strict laws keep E[eps | X] = 0, which forces Cov(d, eps) = 0. The relaxed
law only keeps E[eps] = 0 and gives a covariance of ``gamma * Var(d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import InvalidDistributionError, InvalidModelError
from .graph import DependencyGraph, NodeId

WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SelectionDistribution:
    """Probability law p_t(v) over the nodes of one graph.

    Nodes absent from ``weights`` have probability zero. The support is kept
    in sorted node order so draws are reproducible.
    """

    weights: Mapping[NodeId, float]

    def __post_init__(self):
        items = sorted((str(k), float(w)) for k, w in dict(self.weights).items())
        if not items:
            raise InvalidDistributionError("selection distribution has empty support")
        for v, w in items:
            if not math.isfinite(w) or w < 0:
                raise InvalidDistributionError(f"weight for {v!r} is {w}, must be finite and >= 0")
        total = math.fsum(w for _, w in items)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvalidDistributionError(f"weights sum to {total!r}, expected 1 within {WEIGHT_TOL}")
        object.__setattr__(self, "weights", dict(items))
        object.__setattr__(self, "nodes", tuple(v for v, _ in items))
        probs = np.array([w for _, w in items], dtype=float)
        object.__setattr__(self, "probs", probs)
        # rng.choice demands an exact unit sum
        object.__setattr__(self, "_draw_probs", probs / probs.sum())

    def __eq__(self, other):
        if not isinstance(other, SelectionDistribution):
            return NotImplemented
        return self.weights == other.weights

    def __repr__(self):
        return f"SelectionDistribution({self.weights!r})"

    @classmethod
    def point_mass(cls, v: NodeId) -> SelectionDistribution:
        return cls({v: 1.0})

    @classmethod
    def uniform(cls, graph: DependencyGraph) -> SelectionDistribution:
        nodes = graph.sorted_nodes
        if not nodes:
            raise InvalidDistributionError("cannot select uniformly from an empty graph")
        w = 1.0 / len(nodes)
        return cls({v: w for v in nodes})

    @classmethod
    def degree_proportional(cls, graph: DependencyGraph, offset: float = 0.0) -> SelectionDistribution:
        """p(v) proportional to ``d(v) + offset``."""
        if offset < 0:
            raise InvalidDistributionError("offset must be >= 0")
        deg = graph.degrees()
        raw = {v: deg[v] + offset for v in graph.sorted_nodes}
        total = math.fsum(raw.values())
        if total <= 0:
            raise InvalidDistributionError("degree-proportional selection on a graph with no edges needs offset > 0")
        return cls({v: x / total for v, x in raw.items()})

    def validate_for(self, graph: DependencyGraph) -> None:
        for v in self.nodes:
            if v not in graph.nodes:
                raise InvalidDistributionError(
                    f"selection puts weight on {v!r}, which is not a node at t={graph.timestep}"
                )

    def support_degrees(self, graph: DependencyGraph) -> np.ndarray:
        """Out-degrees of the support nodes, aligned with ``self.probs``."""
        self.validate_for(graph)
        deg = graph.degrees()
        return np.array([deg[v] for v in self.nodes], dtype=np.int64)


@dataclass(frozen=True)
class EffortParams:
    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidModelError(f"alpha must be > 0, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise InvalidModelError(f"beta must be >= 0, got {self.beta!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


def _check_sigma(name, value):
    if not (math.isfinite(value) and value >= 0):
        raise InvalidModelError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class StrictIndependent:
    sigma_eps: float = 0.0

    def __post_init__(self):
        _check_sigma("sigma_eps", self.sigma_eps)
        object.__setattr__(self, "sigma_eps", float(self.sigma_eps))


@dataclass(frozen=True)
class StrictHeteroscedastic:
    """Residual std-dev looked up from a per-degree table.

    Degrees missing from the table use ``default``; if that is ``None`` the
    lookup fails.
    """

    sigma_by_degree: tuple[tuple[int, float], ...]
    default: float | None = None

    def __init__(self, sigma_by_degree: Mapping[int, float] | Sequence[tuple[int, float]], default=None):
        table = dict(sigma_by_degree)
        items = []
        for d, s in sorted(table.items()):
            if int(d) != d or d < 0:
                raise InvalidModelError(f"table degree must be a non-negative integer, got {d!r}")
            _check_sigma(f"sigma[{d}]", s)
            items.append((int(d), float(s)))
        if default is not None:
            _check_sigma("default", default)
            default = float(default)
        object.__setattr__(self, "sigma_by_degree", tuple(items))
        object.__setattr__(self, "default", default)

    def sigma(self, degree: int) -> float:
        table = dict(self.sigma_by_degree)
        if degree in table:
            return table[degree]
        if self.default is None:
            raise InvalidModelError(f"no residual std-dev for degree {degree} and no default")
        return self.default

    def sigmas(self, degrees: np.ndarray) -> np.ndarray:
        degrees = np.asarray(degrees)
        uniq, inverse = np.unique(degrees, return_inverse=True)
        return np.array([self.sigma(int(d)) for d in uniq], dtype=float)[inverse.reshape(degrees.shape)]


@dataclass(frozen=True)
class RelaxedLinear:
    gamma: float
    eta_sigma: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.gamma):
            raise InvalidModelError(f"gamma must be finite, got {self.gamma!r}")
        _check_sigma("eta_sigma", self.eta_sigma)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "eta_sigma", float(self.eta_sigma))


NoiseModel = Union[StrictIndependent, StrictHeteroscedastic, RelaxedLinear]


def is_strict(noise: NoiseModel) -> bool:
    return isinstance(noise, (StrictIndependent, StrictHeteroscedastic))


@dataclass(frozen=True)
class ChangeEvent:
    """One change: target, its degree at step ``t``, the effort and the residual.

    ``residual`` is ``None`` for ingested data, where it is not observed.
    """

    t: int
    target: NodeId
    degree_at_change: int
    effort: float
    residual: float | None = None


@dataclass(frozen=True, eq=False)
class EventBatch:
    """Column-oriented block of change events that share one timestep."""

    t: int
    nodes: tuple[NodeId, ...]
    target_index: np.ndarray
    degrees: np.ndarray
    efforts: np.ndarray
    residuals: np.ndarray | None = None

    def __len__(self):
        return len(self.efforts)

    @property
    def targets(self) -> list[NodeId]:
        return [self.nodes[i] for i in self.target_index]

    def events(self) -> list[ChangeEvent]:
        res = self.residuals.tolist() if self.residuals is not None else [None] * len(self)
        return [
            ChangeEvent(self.t, self.nodes[i], d, e, r)
            for i, d, e, r in zip(
                self.target_index.tolist(), self.degrees.tolist(), self.efforts.tolist(), res
            )
        ]

    def __eq__(self, other):
        if not isinstance(other, EventBatch):
            return NotImplemented
        return (
            self.t == other.t
            and self.targets == other.targets
            and np.array_equal(self.degrees, other.degrees)
            and np.array_equal(self.efforts, other.efforts)
            and (
                (self.residuals is None and other.residuals is None)
                or (
                    self.residuals is not None
                    and other.residuals is not None
                    and np.array_equal(self.residuals, other.residuals)
                )
            )
        )


def degree_moments(probs: np.ndarray, degrees: np.ndarray) -> tuple[float, float]:
    """Exact (mean, variance) of a finite degree law by enumeration."""
    d = degrees.astype(float)
    mu = math.fsum((probs * d).tolist())
    sigma_d2 = math.fsum((probs * (d - mu) ** 2).tolist())
    return mu, max(sigma_d2, 0.0)


def draw_targets(selection: SelectionDistribution, rng: np.random.Generator, size: int) -> np.ndarray:
    """Indices into ``selection.nodes`` for ``size`` independent draws."""
    if len(selection.nodes) == 1:
        return np.zeros(size, dtype=np.int64)
    return rng.choice(len(selection.nodes), size=size, p=selection._draw_probs)


def sample_target(graph: DependencyGraph, selection: SelectionDistribution, rng: np.random.Generator) -> NodeId:
    selection.validate_for(graph)
    return selection.nodes[int(draw_targets(selection, rng, 1)[0])]


def draw_noise(noise: NoiseModel, degrees: np.ndarray, mu: float | None, rng: np.random.Generator) -> np.ndarray:
    """Vectorised residual draws for an array of target degrees."""
    degrees = np.asarray(degrees)
    z = rng.standard_normal(degrees.shape)
    if isinstance(noise, StrictIndependent):
        return z * noise.sigma_eps + 0.0
    if isinstance(noise, StrictHeteroscedastic):
        return z * noise.sigmas(degrees) + 0.0
    if isinstance(noise, RelaxedLinear):
        if mu is None:
            raise InvalidModelError("RelaxedLinear noise needs the population mean degree mu")
        return noise.gamma * (degrees - mu) + z * noise.eta_sigma
    raise InvalidModelError(f"unknown noise model {noise!r}")


def sample_noise(noise: NoiseModel, degree: int, mu: float | None = None, rng: np.random.Generator | None = None) -> float:
    if degree < 0:
        raise InvalidModelError(f"degree must be >= 0, got {degree}")
    if rng is None:
        raise InvalidModelError("an explicit rng stream is required")
    return float(draw_noise(noise, np.array([degree]), mu, rng)[0])


def sample_events(
    graph: DependencyGraph,
    selection: SelectionDistribution,
    params: EffortParams,
    noise: NoiseModel,
    t: int,
    rng: np.random.Generator,
    n: int,
) -> EventBatch:
    """Draw ``n`` independent change events on ``graph``."""
    support_deg = selection.support_degrees(graph)
    mu = None
    if isinstance(noise, RelaxedLinear):
        mu, _ = degree_moments(selection.probs, support_deg)
    idx = draw_targets(selection, rng, n)
    degrees = support_deg[idx]
    residuals = draw_noise(noise, degrees, mu, rng)
    efforts = params.alpha * degrees + params.beta + residuals
    return EventBatch(t, selection.nodes, idx, degrees, efforts, residuals)


def sample_change_event(
    graph: DependencyGraph,
    selection: SelectionDistribution,
    params: EffortParams,
    noise: NoiseModel,
    t: int,
    rng: np.random.Generator,
) -> ChangeEvent:
    return sample_events(graph, selection, params, noise, t, rng, 1).events()[0]

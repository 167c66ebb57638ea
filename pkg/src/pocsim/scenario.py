"""Discrete-time scenario engine.

A :class:`Scenario` fixes the graph path (initial graph plus transitions), a
selection policy, effort parameters and a per-step noise schedule. The graph
path and all population moments are deterministic functions of the scenario;
only change events depend on the replication's RNG stream.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, Sequence, Union

import numpy as np

from . import rng as rngmod
from .change import (
    EffortParams,
    EventBatch,
    NoiseModel,
    RelaxedLinear,
    SelectionDistribution,
    StrictHeteroscedastic,
    StrictIndependent,
    sample_events,
)
from .errors import (
    InfeasibleKnobsError,
    InvalidModelError,
    PocError,
    ScenarioError,
    SimulationError,
    UnknownScenarioKindError,
)
from .graph import DependencyGraph, GraphDelta, apply_delta
from .moments import (
    AssumptionReport,
    DeltaReport,
    MomentSummary,
    PocState,
    RegimeLabel,
    check_assumptions,
    classify_regime,
    deltas,
    empirical_summary_arrays,
    poc_state,
    population_degree_moments,
    population_summary,
)

log = logging.getLogger(__name__)

KINDS = ("regularizing", "heterogenizing", "noise_annealing", "covariance_annealing", "static_control")


# -- selection ---------------------------------------------------------------


@dataclass(frozen=True)
class SelectionPolicy:
    """Rule producing the selection distribution for each step's graph."""

    kind: str = "uniform"
    offset: float = 0.0
    schedule: tuple[Mapping[str, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "degree_proportional", "explicit"):
            raise ScenarioError(f"unknown selection policy {self.kind!r}")
        if self.kind == "explicit" and not self.schedule:
            raise ScenarioError("explicit selection needs a weights schedule")
        object.__setattr__(self, "schedule", tuple(dict(w) for w in self.schedule))

    def at(self, graph: DependencyGraph, step: int) -> SelectionDistribution:
        if self.kind == "uniform":
            return SelectionDistribution.uniform(graph)
        if self.kind == "degree_proportional":
            return SelectionDistribution.degree_proportional(graph, self.offset)
        if step >= len(self.schedule):
            raise ScenarioError(f"selection schedule has no entry for step {step}")
        sel = SelectionDistribution(self.schedule[step])
        sel.validate_for(graph)
        return sel


# -- growth rules ------------------------------------------------------------


def _moments(graph, policy, step):
    return population_degree_moments(graph, policy.at(graph, step))


def _add_edge(graph: DependencyGraph, edge) -> DependencyGraph:
    return DependencyGraph(graph.nodes, graph.edges | {edge}, graph.timestep)


def _add_node(graph: DependencyGraph, v, targets) -> DependencyGraph:
    return DependencyGraph(graph.nodes | {v}, graph.edges | {(v, u) for u in targets}, graph.timestep)


def _room(graph: DependencyGraph, v) -> list[str]:
    """Nodes ``v`` could still point at (no self-loops in generated graphs)."""
    nbrs = {dst for src, dst in graph.edges if src == v}
    return [u for u in graph.sorted_nodes if u != v and u not in nbrs]


@dataclass(frozen=True)
class StaticRule:
    def delta(self, graph, step, policy, seed) -> GraphDelta:
        return GraphDelta()


@dataclass(frozen=True)
class RegularizingGrowth:
    """Growth-only rule that pulls the degree distribution toward ``target_degree``.

    Each step first tries ``new_nodes_per_step`` new nodes born at the target
    degree, then up to ``edges_per_step`` extra out-edges on the lowest-degree
    nodes still below target. A move is kept only if the population mean
    degree does not fall and its variance does not rise, so A1 and A2 hold
    at every step under a time-invariant selection policy.
    """

    target_degree: int
    edges_per_step: int = 2
    new_nodes_per_step: int = 0
    max_tries: int = 8

    def delta(self, graph, step, policy, seed) -> GraphDelta:
        rng = rngmod.stream(seed, rngmod.STRUCTURE, step)
        cur = graph
        mu, s2 = _moments(cur, policy, step)
        new_nodes, new_edges = [], []

        for k in range(self.new_nodes_per_step):
            v = f"g{step:04d}_{k}"
            pool = cur.sorted_nodes
            if len(pool) < self.target_degree:
                break
            picks = rng.choice(len(pool), size=self.target_degree, replace=False)
            trial = _add_node(cur, v, [pool[i] for i in sorted(picks)])
            tmu, ts2 = _moments(trial, policy, step)
            if tmu >= mu and ts2 <= s2:
                cur, mu, s2 = trial, tmu, ts2
                new_nodes.append(v)
                new_edges.extend(sorted((src, dst) for src, dst in trial.edges if src == v))

        accepted = tries = 0
        budget = self.max_tries * max(self.edges_per_step, 1)
        while accepted < self.edges_per_step and tries < budget:
            deg = cur.degrees()
            below = [v for v in cur.sorted_nodes if deg[v] < self.target_degree]
            tiebreak = rng.permutation(len(below))
            order = sorted(range(len(below)), key=lambda i: (deg[below[i]], tiebreak[i]))
            moved = False
            for i in order:
                if tries >= budget:
                    break
                tries += 1
                v = below[i]
                room = _room(cur, v)
                if not room:
                    continue
                u = room[int(rng.integers(len(room)))]
                trial = _add_edge(cur, (v, u))
                tmu, ts2 = _moments(trial, policy, step)
                if tmu >= mu and ts2 <= s2:
                    cur, mu, s2 = trial, tmu, ts2
                    new_edges.append((v, u))
                    accepted += 1
                    moved = True
                    break
            if not moved:
                break
        return GraphDelta(added_nodes=tuple(new_nodes), added_edges=tuple(new_edges))


@dataclass(frozen=True)
class HeterogenizingGrowth:
    """Adds out-edges to the highest-degree nodes, spreading the degree law.

    Only moves that strictly raise the population degree variance are kept;
    when every hub is saturated a fresh node is added to make room.
    """

    edges_per_step: int = 2

    def delta(self, graph, step, policy, seed) -> GraphDelta:
        rng = rngmod.stream(seed, rngmod.STRUCTURE, step)
        cur = graph
        _, s2 = _moments(cur, policy, step)
        new_nodes, new_edges = [], []
        for _ in range(self.edges_per_step):
            deg = cur.degrees()
            hubs = sorted(cur.sorted_nodes, key=lambda v: (-deg[v], v))
            done = False
            for v in hubs:
                room = _room(cur, v)
                if not room:
                    continue
                u = room[int(rng.integers(len(room)))]
                trial = _add_edge(cur, (v, u))
                _, ts2 = _moments(trial, policy, step)
                if ts2 > s2:
                    cur, s2 = trial, ts2
                    new_edges.append((v, u))
                    done = True
                break
            if not done:
                v = f"h{step:04d}_{len(new_nodes)}"
                hub = hubs[0]
                trial = _add_edge(_add_node(cur, v, []), (hub, v))
                _, ts2 = _moments(trial, policy, step)
                if ts2 > s2:
                    cur, s2 = trial, ts2
                    new_nodes.append(v)
                    new_edges.append((hub, v))
        return GraphDelta(added_nodes=tuple(new_nodes), added_edges=tuple(new_edges))


GrowthRule = Union[StaticRule, RegularizingGrowth, HeterogenizingGrowth]


# -- scenario ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Scenario:
    initial_graph: DependencyGraph
    horizon: int
    transitions: Union[GrowthRule, tuple[GraphDelta, ...]]
    selection_policy: SelectionPolicy
    params: EffortParams
    noise_schedule: Union[NoiseModel, tuple[NoiseModel, ...]]
    events_per_step: int = 1000
    seed: int = 0
    kind: str = "custom"
    knobs: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 1:
            raise ScenarioError(f"horizon must be an integer >= 1, got {self.horizon!r}")
        if not isinstance(self.events_per_step, int) or self.events_per_step < 1:
            raise ScenarioError(f"events_per_step must be >= 1, got {self.events_per_step!r}")
        if isinstance(self.transitions, (list, tuple)):
            object.__setattr__(self, "transitions", tuple(self.transitions))
            if len(self.transitions) < self.horizon - 1:
                raise ScenarioError(
                    f"{len(self.transitions)} transitions cannot cover horizon {self.horizon}"
                )
        if isinstance(self.noise_schedule, (list, tuple)):
            object.__setattr__(self, "noise_schedule", tuple(self.noise_schedule))
            if len(self.noise_schedule) < self.horizon:
                raise ScenarioError(
                    f"noise schedule has {len(self.noise_schedule)} entries for horizon {self.horizon}"
                )

    def noise_at(self, step: int) -> NoiseModel:
        if isinstance(self.noise_schedule, tuple):
            return self.noise_schedule[step]
        return self.noise_schedule

    def transition_at(self, graph: DependencyGraph, step: int) -> GraphDelta:
        """Delta taking the step-``step`` graph to step ``step + 1``."""
        if isinstance(self.transitions, tuple):
            return self.transitions[step]
        return self.transitions.delta(graph, step, self.selection_policy, self.seed)


def graph_path(scenario: Scenario) -> list[DependencyGraph]:
    g = scenario.initial_graph
    if g.timestep != 0:
        g = DependencyGraph(g.nodes, g.edges, 0)
    graphs = [g]
    for step in range(scenario.horizon - 1):
        try:
            g = apply_delta(g, scenario.transition_at(g, step))
        except PocError as exc:
            raise ScenarioError(f"transition {step} -> {step + 1} failed: {exc}") from exc
        graphs.append(g)
    return graphs


def population_path(scenario: Scenario, graphs: Sequence[DependencyGraph] | None = None) -> list[MomentSummary]:
    graphs = graph_path(scenario) if graphs is None else graphs
    return [
        population_summary(g, scenario.selection_policy.at(g, t), scenario.noise_at(t), t)
        for t, g in enumerate(graphs)
    ]


@dataclass(eq=False)
class PocTrajectory:
    """Everything recorded for one replication of a scenario.

    ``deltas``/``assumptions``/``regimes`` describe the population path;
    the ``empirical_*`` series are the same reports computed from the
    replication's sampled events (absent when fewer than 2 events per step).
    """

    replication: int
    population: list[MomentSummary]
    states: list[PocState]
    deltas: list[DeltaReport]
    assumptions: list[AssumptionReport]
    regimes: list[RegimeLabel]
    events: list[EventBatch]
    empirical: list[MomentSummary] | None = None
    empirical_states: list[PocState] | None = None
    empirical_deltas: list[DeltaReport] | None = None
    empirical_assumptions: list[AssumptionReport] | None = None
    empirical_regimes: list[RegimeLabel] | None = None

    def change_events(self):
        return [ev for batch in self.events for ev in batch.events()]

    def __eq__(self, other):
        if not isinstance(other, PocTrajectory):
            return NotImplemented
        return trajectory_to_dict(self) == trajectory_to_dict(other)


def _reports(summaries, params, tolerance=None):
    states = [poc_state(s, params) for s in summaries]
    if len(summaries) < 2:
        return states, [], [], []
    ds = deltas(states, t0=summaries[0].t)
    reps = check_assumptions(summaries, tolerance)
    return states, ds, reps, [classify_regime(d) for d in ds]


def _run_one(scenario, graphs, selections, population, pop_reports, replication, tolerance):
    rng = rngmod.replication_stream(scenario.seed, replication)
    batches, empirical = [], []
    for t, (g, sel) in enumerate(zip(graphs, selections)):
        try:
            batch = sample_events(
                g, sel, scenario.params, scenario.noise_at(t), t, rng, scenario.events_per_step
            )
            batches.append(batch)
            if scenario.events_per_step >= 2:
                empirical.append(empirical_summary_arrays(t, batch.degrees, batch.efforts, scenario.params))
        except PocError as exc:
            raise SimulationError(str(exc), t, replication) from exc
    states, ds, reps, regimes = pop_reports
    traj = PocTrajectory(replication, population, states, ds, reps, regimes, batches)
    if empirical:
        es, eds, ereps, eregimes = _reports(empirical, scenario.params, tolerance)
        traj.empirical = empirical
        traj.empirical_states = es
        traj.empirical_deltas = eds
        traj.empirical_assumptions = ereps
        traj.empirical_regimes = eregimes
    return traj


def run_simulation(
    scenario: Scenario, replications: int = 1, workers: int = 1, tolerance: float | None = None
) -> list[PocTrajectory]:
    """Run ``replications`` independent replications of ``scenario``.

    Replication ``r`` draws from the stream derived from ``(seed, r)``, so the
    result does not depend on ``workers``.
    """
    if replications < 1:
        raise ScenarioError("replications must be >= 1")
    graphs = graph_path(scenario)
    selections = [scenario.selection_policy.at(g, t) for t, g in enumerate(graphs)]
    population = [
        population_summary(g, sel, scenario.noise_at(t), t) for t, (g, sel) in enumerate(zip(graphs, selections))
    ]
    pop_reports = _reports(population, scenario.params, 0.0)
    args = (scenario, graphs, selections, population, pop_reports)
    if workers <= 1 or replications == 1:
        return [_run_one(*args, r, tolerance) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {r: pool.submit(_run_one, *args, r, tolerance) for r in range(replications)}
        return [futures[r].result() for r in range(replications)]


# -- serialization -----------------------------------------------------------


def _summary_from(d):
    return MomentSummary(**d)


def trajectory_to_dict(traj: PocTrajectory) -> dict:
    def opt(xs, conv):
        return None if xs is None else [conv(x) for x in xs]

    def regime(r):
        return r.value

    return {
        "replication": traj.replication,
        "population": [asdict(s) for s in traj.population],
        "states": [asdict(s) for s in traj.states],
        "deltas": [asdict(d) for d in traj.deltas],
        "assumptions": [asdict(a) for a in traj.assumptions],
        "regimes": [regime(r) for r in traj.regimes],
        "events": [
            {
                "t": b.t,
                "nodes": list(b.nodes),
                "target_index": b.target_index.tolist(),
                "degrees": b.degrees.tolist(),
                "efforts": b.efforts.tolist(),
                "residuals": None if b.residuals is None else b.residuals.tolist(),
            }
            for b in traj.events
        ],
        "empirical": opt(traj.empirical, asdict),
        "empirical_states": opt(traj.empirical_states, asdict),
        "empirical_deltas": opt(traj.empirical_deltas, asdict),
        "empirical_assumptions": opt(traj.empirical_assumptions, asdict),
        "empirical_regimes": opt(traj.empirical_regimes, regime),
    }


def trajectory_from_dict(d: Mapping) -> PocTrajectory:
    def opt(xs, conv):
        return None if xs is None else [conv(x) for x in xs]

    batches = [
        EventBatch(
            b["t"],
            tuple(b["nodes"]),
            np.array(b["target_index"], dtype=np.int64),
            np.array(b["degrees"], dtype=np.int64),
            np.array(b["efforts"], dtype=float),
            None if b["residuals"] is None else np.array(b["residuals"], dtype=float),
        )
        for b in d["events"]
    ]
    return PocTrajectory(
        replication=d["replication"],
        population=[_summary_from(s) for s in d["population"]],
        states=[PocState(**s) for s in d["states"]],
        deltas=[DeltaReport(**x) for x in d["deltas"]],
        assumptions=[AssumptionReport(**a) for a in d["assumptions"]],
        regimes=[RegimeLabel(r) for r in d["regimes"]],
        events=batches,
        empirical=opt(d["empirical"], _summary_from),
        empirical_states=opt(d["empirical_states"], lambda s: PocState(**s)),
        empirical_deltas=opt(d["empirical_deltas"], lambda x: DeltaReport(**x)),
        empirical_assumptions=opt(d["empirical_assumptions"], lambda a: AssumptionReport(**a)),
        empirical_regimes=opt(d["empirical_regimes"], RegimeLabel),
    )


# -- generators --------------------------------------------------------------


def random_graph(n_nodes: int, max_degree: int, rng: np.random.Generator, min_degree: int = 0) -> DependencyGraph:
    """Graph on ``v0000..`` whose out-degrees are uniform on [min_degree, max_degree]."""
    if n_nodes < 1:
        raise InfeasibleKnobsError("n_nodes must be >= 1")
    if not 0 <= min_degree <= max_degree <= n_nodes - 1:
        raise InfeasibleKnobsError(
            f"degrees must satisfy 0 <= min_degree <= max_degree <= n_nodes - 1 (got {min_degree}, {max_degree}, {n_nodes})"
        )
    width = max(4, len(str(n_nodes - 1)))
    nodes = [f"v{i:0{width}d}" for i in range(n_nodes)]
    edges = set()
    degs = rng.integers(min_degree, max_degree + 1, size=n_nodes)
    for i, v in enumerate(nodes):
        # draw from the n-1 other nodes by skipping over i
        for j in rng.choice(n_nodes - 1, size=int(degs[i]), replace=False).tolist():
            edges.add((v, nodes[j + (j >= i)]))
    return DependencyGraph(frozenset(nodes), frozenset(edges), 0)


_DEFAULT_GROWTH = {
    "regularizing": "regularizing",
    "heterogenizing": "heterogenizing",
    "noise_annealing": "static",
    "covariance_annealing": "static",
    "static_control": "static",
}
_DEFAULT_NOISE = {
    "regularizing": "constant",
    "heterogenizing": "constant",
    "noise_annealing": "annealing",
    "covariance_annealing": "covariance_annealing",
    "static_control": "constant",
}

_COMMON_KNOBS = {
    "horizon": 20,
    "events_per_step": 1000,
    "n_nodes": 40,
    "min_initial_degree": 0,
    "max_initial_degree": 12,
    "alpha": 1.0,
    "beta": 0.0,
    "selection": "uniform",
    "selection_offset": 0.0,
    "growth": None,
    "noise": None,
    "target_degree": None,
    "edges_per_step": 2,
    "new_nodes_per_step": 0,
    "sigma_eps": 1.0,
    "sigma_start": 3.0,
    "sigma_end": 1.0,
    "sigma_schedule": None,
    "gamma_start": 0.5,
    "gamma_end": 0.0,
    "eta_sigma": 1.0,
}


def _linspace(start, end, n):
    if n == 1:
        return [float(start)]
    return [float(x) for x in np.linspace(start, end, n)]


def _noise_schedule(k, horizon):
    mode = k["noise"]
    if mode == "constant":
        return StrictIndependent(k["sigma_eps"])
    if mode == "annealing":
        sig = k["sigma_schedule"]
        sig = list(sig) if sig is not None else _linspace(k["sigma_start"], k["sigma_end"], horizon)
        if len(sig) < horizon:
            raise InfeasibleKnobsError(f"sigma_schedule has {len(sig)} entries for horizon {horizon}")
        if any(b > a for a, b in zip(sig, sig[1:])):
            raise InfeasibleKnobsError("annealing sigma schedule must be non-increasing")
        return tuple(StrictIndependent(s) for s in sig[:horizon])
    if mode == "covariance_annealing":
        g0, g1 = float(k["gamma_start"]), float(k["gamma_end"])
        if g1 > g0 or g1 < 0:
            raise InfeasibleKnobsError("gamma must be non-increasing and stay >= 0")
        return tuple(RelaxedLinear(g, k["eta_sigma"]) for g in _linspace(g0, g1, horizon))
    raise InfeasibleKnobsError(f"unknown noise mode {mode!r}")


def generate_scenario(kind: str, knobs: Mapping[str, Any] | None = None, seed: int = 0) -> Scenario:
    """Build one of the preset scenario families.

    ``kind`` picks default growth and noise behaviour; every default can be
    overridden through ``knobs`` (see ``_COMMON_KNOBS`` for the full list).
    """
    if kind not in KINDS:
        raise UnknownScenarioKindError(f"unknown scenario kind {kind!r}; expected one of {', '.join(KINDS)}")
    knobs = dict(knobs or {})
    unknown = set(knobs) - set(_COMMON_KNOBS)
    if unknown:
        raise InfeasibleKnobsError(f"unknown knobs: {', '.join(sorted(unknown))}")
    k = {**_COMMON_KNOBS, **knobs}
    k["growth"] = k["growth"] or _DEFAULT_GROWTH[kind]
    k["noise"] = k["noise"] or _DEFAULT_NOISE[kind]
    if kind == "static_control" and (k["growth"] != "static" or k["noise"] != "constant"):
        raise InfeasibleKnobsError("static_control is a frozen graph with constant noise")

    horizon = int(k["horizon"])
    g0 = random_graph(
        int(k["n_nodes"]),
        int(k["max_initial_degree"]),
        rngmod.stream(seed, rngmod.SCENARIO),
        int(k["min_initial_degree"]),
    )
    degs = g0.degrees().values()
    if k["growth"] == "regularizing":
        target = k["target_degree"]
        target = max(degs) if target is None else int(target)
        if target < min(degs):
            raise InfeasibleKnobsError(
                f"target_degree {target} is below the current minimum degree {min(degs)}; growth-only rules cannot lower degrees"
            )
        room = len(g0) - 1 + int(k["new_nodes_per_step"]) * (horizon - 1)
        if target > room:
            raise InfeasibleKnobsError(f"target_degree {target} exceeds the reachable out-degree {room}")
        transitions = RegularizingGrowth(target, int(k["edges_per_step"]), int(k["new_nodes_per_step"]))
        k["target_degree"] = target
    elif k["growth"] == "heterogenizing":
        transitions = HeterogenizingGrowth(int(k["edges_per_step"]))
    elif k["growth"] == "static":
        transitions = StaticRule()
    else:
        raise InfeasibleKnobsError(f"unknown growth rule {k['growth']!r}")

    try:
        scenario = Scenario(
            initial_graph=g0,
            horizon=horizon,
            transitions=transitions,
            selection_policy=SelectionPolicy(k["selection"], float(k["selection_offset"])),
            params=EffortParams(k["alpha"], k["beta"]),
            noise_schedule=_noise_schedule(k, horizon),
            events_per_step=int(k["events_per_step"]),
            seed=int(seed),
            kind=kind,
            knobs=k,
        )
    except InvalidModelError as exc:
        raise InfeasibleKnobsError(str(exc)) from exc
    return scenario


# -- config documents --------------------------------------------------------


def noise_from_mapping(d: Mapping[str, Any]) -> NoiseModel:
    mode = d.get("mode", "strict_independent")
    if mode == "strict_independent":
        return StrictIndependent(float(d.get("sigma_eps", 0.0)))
    if mode == "strict_heteroscedastic":
        table = {int(k): float(v) for k, v in dict(d.get("sigma_by_degree", {})).items()}
        return StrictHeteroscedastic(table, d.get("default"))
    if mode == "relaxed_linear":
        return RelaxedLinear(float(d["gamma"]), float(d.get("eta_sigma", 0.0)))
    raise ScenarioError(f"unknown noise mode {mode!r}")


def scenario_from_mapping(cfg: Mapping[str, Any], seed: int | None = None) -> Scenario:
    """Build a scenario from a parsed config document.

    Two shapes are accepted: a preset (``kind`` plus an optional ``knobs``
    table) or an explicit scenario (``kind = "explicit"`` with ``graph``,
    ``transitions``, ``noise`` and the scalar fields).
    """
    cfg = dict(cfg)
    seed = int(cfg.get("seed", 0)) if seed is None else int(seed)
    kind = cfg.get("kind")
    if kind is None:
        raise ScenarioError("scenario config needs a 'kind' key")
    if kind != "explicit":
        return generate_scenario(kind, cfg.get("knobs", {}), seed)

    try:
        gcfg = cfg["graph"]
        g0 = DependencyGraph.from_edges(gcfg.get("nodes", []), [tuple(e) for e in gcfg.get("edges", [])])
        horizon = int(cfg["horizon"])
        transitions = tuple(
            GraphDelta(
                added_nodes=tuple(t.get("added_nodes", ())),
                removed_nodes=tuple(t.get("removed_nodes", ())),
                added_edges=tuple(tuple(e) for e in t.get("added_edges", ())),
                removed_edges=tuple(tuple(e) for e in t.get("removed_edges", ())),
            )
            for t in cfg.get("transitions", [])
        )
        noise_cfg = cfg.get("noise", {"mode": "strict_independent", "sigma_eps": 0.0})
        if isinstance(noise_cfg, list):
            noise = tuple(noise_from_mapping(n) for n in noise_cfg)
        else:
            noise = noise_from_mapping(noise_cfg)
        policy = SelectionPolicy(
            cfg.get("selection", "uniform"),
            float(cfg.get("selection_offset", 0.0)),
            tuple(cfg.get("selection_schedule", ())),
        )
        return Scenario(
            initial_graph=g0,
            horizon=horizon,
            transitions=transitions,
            selection_policy=policy,
            params=EffortParams(float(cfg.get("alpha", 1.0)), float(cfg.get("beta", 0.0))),
            noise_schedule=noise,
            events_per_step=int(cfg.get("events_per_step", 1000)),
            seed=seed,
            kind="explicit",
            knobs={},
        )
    except KeyError as exc:
        raise ScenarioError(f"explicit scenario is missing key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PocError):
            raise
        raise ScenarioError(f"malformed explicit scenario: {exc}") from exc


def scenario_description(scenario: Scenario) -> dict:
    """JSON-friendly identification of a scenario (not a full serialization)."""
    knobs = {k: (list(v) if isinstance(v, tuple) else v) for k, v in dict(scenario.knobs).items()}
    return {
        "kind": scenario.kind,
        "seed": scenario.seed,
        "horizon": scenario.horizon,
        "events_per_step": scenario.events_per_step,
        "alpha": scenario.params.alpha,
        "beta": scenario.params.beta,
        "selection": scenario.selection_policy.kind,
        "knobs": knobs,
    }

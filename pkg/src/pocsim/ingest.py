"""Reading and writing graph snapshots and change-event logs.

Snapshot files are line oriented (UTF-8, ``#`` starts a comment)::

    t 0
    node a
    node b
    edge a b
    t 1
    ...

Each ``t <int>`` line opens a block that is a complete snapshot of the
graph at that step; ``t`` values must strictly increase. Event logs are CSV
lines ``t,node,effort`` with an optional ``t,node,effort`` header.
"""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

from .change import ChangeEvent, EffortParams, EventBatch
from .errors import (
    DuplicateNodeError,
    InsufficientDataError,
    InvalidModelError,
    NonFiniteEffortError,
    NonIncreasingTimestepError,
    ParseError,
    SnapshotDanglingEdgeError,
    UnknownNodeError,
    UnknownStepError,
)
from .graph import DependencyGraph, out_degree
from .moments import (
    AssumptionReport,
    DeltaReport,
    FitDiagnostics,
    MomentSummary,
    PocState,
    RegimeLabel,
    check_assumptions,
    classify_regime,
    deltas,
    empirical_summary_arrays,
    fit_effort_params,
    poc_state,
)

Source = Union[str, Path, TextIO, Iterable[str]]

_INT = re.compile(r"^[0-9]+$")
EVENT_HEADER = ("t", "node", "effort")


def _lines(source: Source) -> tuple[Iterable[str], str]:
    if isinstance(source, Path):
        return source.read_text(encoding="utf-8").splitlines(), str(source)
    if isinstance(source, str):
        return source.splitlines(), "<string>"
    name = getattr(source, "name", "<stream>")
    return source, str(name)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return (line if i < 0 else line[:i]).strip()


@dataclass
class _Block:
    t: int
    line: int
    nodes: dict[str, int] = field(default_factory=dict)
    edges: dict[tuple[str, str], int] = field(default_factory=dict)


def _close(block: _Block, source: str) -> DependencyGraph:
    for (src, dst), line in block.edges.items():
        for v in (src, dst):
            if v not in block.nodes:
                raise SnapshotDanglingEdgeError(line, f"edge {src} {dst} references undeclared node {v!r}", source)
    return DependencyGraph(frozenset(block.nodes), frozenset(block.edges), block.t)


def parse_snapshots(source: Source) -> list[DependencyGraph]:
    """Parse a snapshot file into one graph per ``t`` block."""
    lines, name = _lines(source)
    graphs: list[DependencyGraph] = []
    block: _Block | None = None
    last_t = None
    for lineno, raw in enumerate(lines, 1):
        raw = raw.rstrip("\r\n")
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "t":
            if len(parts) != 2 or not _INT.match(parts[1]):
                raise ParseError(lineno, f"expected 't <non-negative int>', got {raw.strip()!r}", name)
            t = int(parts[1])
            if last_t is not None and t <= last_t:
                raise NonIncreasingTimestepError(lineno, f"t {t} does not increase on previous t {last_t}", name)
            if block is not None:
                graphs.append(_close(block, name))
            block = _Block(t, lineno)
            last_t = t
        elif kw == "node":
            if len(parts) != 2:
                raise ParseError(lineno, f"expected 'node <id>', got {raw.strip()!r}", name)
            if block is None:
                raise ParseError(lineno, "node declared before any 't' line", name)
            v = parts[1]
            if v in block.nodes:
                raise DuplicateNodeError(lineno, f"node {v!r} already declared on line {block.nodes[v]}", name)
            block.nodes[v] = lineno
        elif kw == "edge":
            if len(parts) != 3:
                raise ParseError(lineno, f"expected 'edge <src> <dst>', got {raw.strip()!r}", name)
            if block is None:
                raise ParseError(lineno, "edge declared before any 't' line", name)
            e = (parts[1], parts[2])
            if e in block.edges:
                raise ParseError(lineno, f"edge {e[0]} {e[1]} already declared on line {block.edges[e]}", name)
            block.edges[e] = lineno
        else:
            raise ParseError(lineno, f"unknown directive {kw!r}", name)
    if block is not None:
        graphs.append(_close(block, name))
    return graphs


@dataclass(frozen=True)
class EventLogRecord:
    t: int
    node: str
    effort: float


def parse_events(source: Source) -> list[EventLogRecord]:
    """Parse a ``t,node,effort`` CSV event log, keeping file order."""
    lines, name = _lines(source)
    records = []
    seen_data = False
    for lineno, raw in enumerate(lines, 1):
        line = _strip_comment(raw.rstrip("\r\n"))
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3:
            raise ParseError(lineno, f"expected 3 comma-separated fields, got {len(fields)}", name)
        if tuple(fields) == EVENT_HEADER:
            if seen_data:
                raise ParseError(lineno, "header line after data", name)
            seen_data = True
            continue
        seen_data = True
        t_s, node, eff_s = fields
        if not _INT.match(t_s):
            raise ParseError(lineno, f"t must be a non-negative integer, got {t_s!r}", name)
        if not node or any(c.isspace() for c in node):
            raise ParseError(lineno, f"invalid node id {node!r}", name)
        try:
            effort = float(eff_s)
        except ValueError:
            raise ParseError(lineno, f"effort is not a number: {eff_s!r}", name) from None
        if not math.isfinite(effort):
            raise NonFiniteEffortError(lineno, f"effort must be finite, got {eff_s!r}", name)
        records.append(EventLogRecord(int(t_s), node, effort))
    return records


@dataclass
class AnalysisReport:
    """Per-step empirical analysis of an ingested dataset.

    Steps are indexed by position (0, 1, ...) in snapshot order; ``labels``
    maps each position back to the ``t`` declared in the snapshot file.
    """

    params: EffortParams
    fit: FitDiagnostics | None
    labels: list[int]
    summaries: list[MomentSummary]
    states: list[PocState]
    deltas: list[DeltaReport]
    assumptions: list[AssumptionReport]
    regimes: list[RegimeLabel]
    events: list[ChangeEvent]


def join_events(snapshots: Sequence[DependencyGraph], records: Sequence[EventLogRecord]) -> list[list[ChangeEvent]]:
    """Attach d_t(node) to every record; returns events grouped per snapshot."""
    index = {g.timestep: i for i, g in enumerate(snapshots)}
    grouped: list[list[ChangeEvent]] = [[] for _ in snapshots]
    for rec in records:
        if rec.t not in index:
            raise UnknownStepError(f"event at t={rec.t} has no matching snapshot")
        i = index[rec.t]
        g = snapshots[i]
        if rec.node not in g:
            raise UnknownNodeError(rec.node, rec.t)
        grouped[i].append(ChangeEvent(i, rec.node, out_degree(g, rec.node), rec.effort, None))
    return grouped


def analyze(
    snapshots: Sequence[DependencyGraph],
    records: Sequence[EventLogRecord],
    params: EffortParams | None = None,
    tolerance: float | None = None,
) -> AnalysisReport:
    """Empirical burden/uncertainty analysis of ingested data.

    Without ``params`` the effort model is first fitted by OLS on the pooled
    events; an inadmissible fit (alpha <= 0 or beta < 0) is an error.
    """
    if not snapshots:
        raise InsufficientDataError("no snapshots to analyze")
    grouped = join_events(snapshots, records)
    fit = None
    if params is None:
        pooled = [ev for group in grouped for ev in group]
        params, fit = fit_effort_params(pooled)
        if params is None:
            raise InvalidModelError(f"fitted effort model is inadmissible: {fit.message}")
    summaries = []
    for i, group in enumerate(grouped):
        if len(group) < 2:
            raise InsufficientDataError(
                f"step t={snapshots[i].timestep} has {len(group)} event(s); need at least 2", t=snapshots[i].timestep
            )
        summaries.append(
            empirical_summary_arrays(i, [ev.degree_at_change for ev in group], [ev.effort for ev in group], params)
        )
    states = [poc_state(s, params) for s in summaries]
    ds: list[DeltaReport] = []
    reps: list[AssumptionReport] = []
    if len(summaries) >= 2:
        ds = deltas(states, t0=0)
        reps = check_assumptions(summaries, tolerance)
    return AnalysisReport(
        params=params,
        fit=fit,
        labels=[g.timestep for g in snapshots],
        summaries=summaries,
        states=states,
        deltas=ds,
        assumptions=reps,
        regimes=[classify_regime(d) for d in ds],
        events=[ev for group in grouped for ev in group],
    )


# -- writers -----------------------------------------------------------------


def format_snapshots(graphs: Sequence[DependencyGraph]) -> str:
    out = io.StringIO()
    for g in graphs:
        out.write(f"t {g.timestep}\n")
        for v in g.sorted_nodes:
            out.write(f"node {v}\n")
        for src, dst in sorted(g.edges):
            out.write(f"edge {src} {dst}\n")
    return out.getvalue()


def format_events(batches: Sequence[EventBatch]) -> str:
    """CSV event log; efforts use ``repr`` so they parse back bit-exactly."""
    out = io.StringIO()
    out.write(",".join(EVENT_HEADER) + "\n")
    for b in batches:
        for node, effort in zip(b.targets, b.efforts.tolist()):
            out.write(f"{b.t},{node},{effort!r}\n")
    return out.getvalue()


def export_dataset(graphs: Sequence[DependencyGraph], batches: Sequence[EventBatch], directory: Path) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    snap = directory / "snapshots.txt"
    ev = directory / "events.csv"
    snap.write_text(format_snapshots(graphs), encoding="utf-8")
    ev.write_text(format_events(batches), encoding="utf-8")
    return snap, ev

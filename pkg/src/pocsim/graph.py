"""Immutable, time-indexed directed dependency graphs."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .errors import (
    DanglingEdgeError,
    DuplicateItemError,
    GraphError,
    MissingItemError,
    UnknownNodeError,
)

NodeId = str
Edge = tuple[NodeId, NodeId]


def _check_node_id(v) -> None:
    if not isinstance(v, str) or not v:
        raise GraphError(f"node ids must be non-empty strings, got {v!r}")


@dataclass(frozen=True)
class DependencyGraph:
    """Snapshot G_t of the system's dependency structure.

    Self-loops are allowed and count once toward the out-degree.
    Instances are never mutated; use :func:`apply_delta` to evolve them.
    """

    nodes: frozenset[NodeId]
    edges: frozenset[Edge]
    timestep: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        if not isinstance(self.timestep, int) or self.timestep < 0:
            raise GraphError(f"timestep must be a non-negative integer, got {self.timestep!r}")
        for v in self.nodes:
            _check_node_id(v)
        for src, dst in self.edges:
            if src not in self.nodes or dst not in self.nodes:
                raise DanglingEdgeError(f"edge ({src!r}, {dst!r}) has an endpoint outside the node set")

    @classmethod
    def from_edges(cls, nodes: Iterable[NodeId], edges: Iterable[Edge] = (), timestep: int = 0):
        return cls(frozenset(nodes), frozenset(edges), timestep)

    @cached_property
    def _adjacency(self) -> dict[NodeId, frozenset[NodeId]]:
        out: dict[NodeId, set[NodeId]] = {v: set() for v in self.nodes}
        for src, dst in self.edges:
            out[src].add(dst)
        return {v: frozenset(nbrs) for v, nbrs in out.items()}

    @cached_property
    def sorted_nodes(self) -> tuple[NodeId, ...]:
        """Nodes in a canonical order; all sampling indexes into this tuple."""
        return tuple(sorted(self.nodes))

    def degrees(self) -> dict[NodeId, int]:
        return {v: len(nbrs) for v, nbrs in self._adjacency.items()}

    def degree_histogram(self) -> Counter:
        return Counter(len(nbrs) for nbrs in self._adjacency.values())

    def __contains__(self, v) -> bool:
        return v in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)


def out_neighborhood(graph: DependencyGraph, v: NodeId) -> frozenset[NodeId]:
    """Return {u | (v, u) in E}."""
    try:
        return graph._adjacency[v]
    except KeyError:
        raise UnknownNodeError(v, graph.timestep) from None


def out_degree(graph: DependencyGraph, v: NodeId) -> int:
    return len(out_neighborhood(graph, v))


@dataclass(frozen=True)
class GraphDelta:
    """Structural transition between two consecutive snapshots."""

    added_nodes: tuple[NodeId, ...] = ()
    removed_nodes: tuple[NodeId, ...] = ()
    added_edges: tuple[Edge, ...] = ()
    removed_edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        for name in ("added_nodes", "removed_nodes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for name in ("added_edges", "removed_edges"):
            object.__setattr__(self, name, tuple(tuple(e) for e in getattr(self, name)))
        both = set(self.added_nodes) & set(self.removed_nodes)
        if both:
            raise GraphError(f"nodes both added and removed: {sorted(both)}")
        both_e = set(self.added_edges) & set(self.removed_edges)
        if both_e:
            raise GraphError(f"edges both added and removed: {sorted(both_e)}")

    def inverse(self) -> GraphDelta:
        return GraphDelta(
            added_nodes=self.removed_nodes,
            removed_nodes=self.added_nodes,
            added_edges=self.removed_edges,
            removed_edges=self.added_edges,
        )

    def is_empty(self) -> bool:
        return not (self.added_nodes or self.removed_nodes or self.added_edges or self.removed_edges)


def _no_duplicates(items, what):
    seen = set()
    for x in items:
        if x in seen:
            raise DuplicateItemError(f"{what} {x!r} listed twice in delta")
        seen.add(x)


def apply_delta(graph: DependencyGraph, delta: GraphDelta) -> DependencyGraph:
    """Apply ``delta`` atomically and return the snapshot for ``timestep + 1``.

    Order: remove edges, remove nodes, add nodes, add edges. Removing a node
    whose incident edges survive is an error; there is no cascading removal.
    """
    for items, what in (
        (delta.added_nodes, "node"),
        (delta.removed_nodes, "node"),
        (delta.added_edges, "edge"),
        (delta.removed_edges, "edge"),
    ):
        _no_duplicates(items, what)

    edges = set(graph.edges)
    for e in delta.removed_edges:
        if e not in edges:
            raise MissingItemError(f"cannot remove missing edge {e!r}")
        edges.remove(e)

    nodes = set(graph.nodes)
    removed = set(delta.removed_nodes)
    for v in delta.removed_nodes:
        if v not in nodes:
            raise MissingItemError(f"cannot remove missing node {v!r}")
    if removed:
        for src, dst in edges:
            if src in removed or dst in removed:
                raise DanglingEdgeError(
                    f"removing node {src if src in removed else dst!r} leaves edge ({src!r}, {dst!r})"
                )
    nodes -= removed

    for v in delta.added_nodes:
        _check_node_id(v)
        if v in nodes:
            raise DuplicateItemError(f"node {v!r} already exists")
        nodes.add(v)

    for e in delta.added_edges:
        if e in edges:
            raise DuplicateItemError(f"edge {e!r} already exists")
        src, dst = e
        if src not in nodes or dst not in nodes:
            raise DanglingEdgeError(f"added edge {e!r} references a node not in the graph")
        edges.add(e)

    return DependencyGraph(frozenset(nodes), frozenset(edges), graph.timestep + 1)

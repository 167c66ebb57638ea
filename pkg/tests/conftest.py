import numpy as np
import pytest

from pocsim.change import SelectionDistribution
from pocsim.graph import DependencyGraph

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def graph_with_degrees(degrees, prefix="n"):
    """Graph whose nodes n0, n1, ... have the given out-degrees.

    Out-edges point at sink nodes s0, s1, ... (degree 0) so any degree is
    reachable; sinks are left out of ``degree_selection``.
    """
    degrees = list(degrees)
    sinks = [f"s{j}" for j in range(max(degrees, default=0))]
    nodes = [f"{prefix}{i}" for i in range(len(degrees))]
    edges = {(v, sinks[j]) for v, d in zip(nodes, degrees) for j in range(d)}
    return DependencyGraph(frozenset(nodes + sinks), frozenset(edges), 0), nodes


def degree_selection(nodes, weights=None):
    if weights is None:
        weights = [1.0 / len(nodes)] * len(nodes)
    return SelectionDistribution(dict(zip(nodes, weights)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")

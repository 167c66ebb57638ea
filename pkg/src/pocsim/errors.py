"""Exception hierarchy shared by all pocsim modules."""


class PocError(Exception):
    """Base class for every error raised by pocsim."""


class GraphError(PocError, ValueError):
    pass


class UnknownNodeError(GraphError, KeyError):
    def __init__(self, node, t=None):
        self.node = node
        self.t = t
        where = f" at t={t}" if t is not None else ""
        super().__init__(f"unknown node {node!r}{where}")

    def __str__(self):
        return self.args[0]


class DanglingEdgeError(GraphError):
    pass


class DuplicateItemError(GraphError):
    pass


class MissingItemError(GraphError):
    pass


class InvalidDistributionError(PocError, ValueError):
    pass


class InvalidModelError(PocError, ValueError):
    """Bad EffortParams or NoiseModel construction."""


class InsufficientDataError(PocError, ValueError):
    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)


class MixedTimestepError(PocError, ValueError):
    pass


class DegenerateDesignError(PocError, ValueError):
    pass


class NegativeUncertaintyError(PocError, ValueError):
    pass


class InsufficientSeriesError(PocError, ValueError):
    pass


class NonConsecutiveSeriesError(PocError, ValueError):
    pass


class EmpiricalSourceError(PocError, ValueError):
    pass


class ScenarioError(PocError, ValueError):
    pass


class UnknownScenarioKindError(ScenarioError):
    pass


class InfeasibleKnobsError(ScenarioError):
    pass


class SimulationError(PocError, RuntimeError):
    """A replication aborted; carries the step and replication that failed."""

    def __init__(self, message, t, replication):
        self.t = t
        self.replication = replication
        super().__init__(f"replication {replication}, step t={t}: {message}")


class ParseError(PocError, ValueError):
    def __init__(self, line, reason, source="<input>"):
        self.line = line
        self.reason = reason
        self.source = source
        super().__init__(f"{source}:{line}: {reason}")


class SnapshotDanglingEdgeError(ParseError, DanglingEdgeError):
    pass


class DuplicateNodeError(ParseError, DuplicateItemError):
    pass


class NonIncreasingTimestepError(ParseError):
    pass


class NonFiniteEffortError(ParseError):
    pass


class UnknownStepError(PocError, ValueError):
    """An event refers to a step that has no snapshot."""

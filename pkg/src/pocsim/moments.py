"""Moment summaries, burden/uncertainty closed forms and the A1-A4 machinery.

Population summaries come from exact enumeration over the selection law and
the analytic moments of the noise law. Empirical summaries come from observed
change events using unbiased (n - 1) estimators. Only population summaries
are accepted by :func:`verify_theorem`; empirical series are judged with
:func:`check_assumptions` and :func:`classify_regime` under a tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .change import (
    ChangeEvent,
    EffortParams,
    NoiseModel,
    RelaxedLinear,
    SelectionDistribution,
    StrictHeteroscedastic,
    StrictIndependent,
    degree_moments,
)
from .errors import (
    DegenerateDesignError,
    EmpiricalSourceError,
    InsufficientDataError,
    InsufficientSeriesError,
    InvalidModelError,
    MixedTimestepError,
    NegativeUncertaintyError,
    NonConsecutiveSeriesError,
)
from .graph import DependencyGraph

POPULATION = "population"
EMPIRICAL = "empirical"
DEFAULT_EMPIRICAL_TOLERANCE = 1e-9
THEOREM_SLACK = 1e-12
_CS_SLACK = 1e-9


@dataclass(frozen=True)
class MomentSummary:
    """Per-step (mu, sigma_d^2, sigma_eps^2, c) with its provenance."""

    t: int
    mu: float
    sigma_d2: float
    sigma_eps2: float
    cov_d_eps: float
    source: str = POPULATION
    n: int | None = None

    def __post_init__(self):
        if self.source not in (POPULATION, EMPIRICAL):
            raise ValueError(f"source must be {POPULATION!r} or {EMPIRICAL!r}, got {self.source!r}")
        if self.source == EMPIRICAL and (self.n is None or self.n < 2):
            raise ValueError("empirical summaries carry their sample count n >= 2")
        if self.sigma_d2 < 0 or self.sigma_eps2 < 0:
            raise ValueError(f"variances must be >= 0 (got {self.sigma_d2}, {self.sigma_eps2})")
        bound = math.sqrt(self.sigma_d2 * self.sigma_eps2)
        # absolute slack plus a few ulps for large magnitudes
        if abs(self.cov_d_eps) > bound + _CS_SLACK + 1e-12 * bound:
            raise ValueError(
                f"|cov_d_eps|={abs(self.cov_d_eps)} exceeds Cauchy-Schwarz bound {bound}"
            )

    @property
    def is_population(self) -> bool:
        return self.source == POPULATION


@dataclass(frozen=True)
class PocState:
    burden: float
    uncertainty: float

    def __post_init__(self):
        if self.uncertainty < 0:
            raise NegativeUncertaintyError(f"uncertainty must be >= 0, got {self.uncertainty}")


@dataclass(frozen=True)
class DeltaReport:
    t: int
    delta_b: float
    delta_u: float


@dataclass(frozen=True)
class AssumptionReport:
    """A1-A4 for the transition t -> t+1."""

    t: int
    a1_holds: bool
    a2_holds: bool
    a3_holds: bool
    a4_holds: bool
    a2_strict: bool
    a3_strict: bool
    a4_strict: bool
    tolerance: float

    @property
    def all_hold(self) -> bool:
        return self.a1_holds and self.a2_holds and self.a3_holds and self.a4_holds

    @property
    def any_strict(self) -> bool:
        return self.a2_strict or self.a3_strict or self.a4_strict


class RegimeLabel(str, enum.Enum):
    STABILIZATION_WITHOUT_SIMPLIFICATION = "StabilizationWithoutSimplification"
    SIMPLIFYING_STABILIZATION = "SimplifyingStabilization"
    BURDENED_DESTABILIZATION = "BurdenedDestabilization"
    SIMPLIFYING_DESTABILIZATION = "SimplifyingDestabilization"
    STATIONARY = "Stationary"

    def __str__(self):
        return self.value


# -- population path ---------------------------------------------------------


def population_degree_moments(graph: DependencyGraph, selection: SelectionDistribution) -> tuple[float, float]:
    return degree_moments(selection.probs, selection.support_degrees(graph))


def degree_law(graph: DependencyGraph, selection: SelectionDistribution) -> dict[int, float]:
    """Probability mass function of d(X) under ``selection``."""
    pmf: dict[int, list[float]] = {}
    for p, d in zip(selection.probs.tolist(), selection.support_degrees(graph).tolist()):
        pmf.setdefault(d, []).append(p)
    return {d: math.fsum(ps) for d, ps in sorted(pmf.items())}


def population_residual_moments(
    noise: NoiseModel, sigma_d2: float, degree_pmf: Mapping[int, float] | None = None
) -> tuple[float, float]:
    """Analytic (Var(eps), Cov(d, eps)) of a noise law.

    The heteroscedastic law needs the degree distribution, passed as
    ``degree_pmf`` (degree -> probability).
    """
    if isinstance(noise, StrictIndependent):
        return noise.sigma_eps**2, 0.0
    if isinstance(noise, StrictHeteroscedastic):
        if degree_pmf is None:
            raise InvalidModelError("heteroscedastic residual moments need the degree distribution")
        return math.fsum(p * noise.sigma(d) ** 2 for d, p in degree_pmf.items()), 0.0
    if isinstance(noise, RelaxedLinear):
        g = noise.gamma
        return g * g * sigma_d2 + noise.eta_sigma**2, g * sigma_d2
    raise InvalidModelError(f"unknown noise model {noise!r}")


def population_summary(
    graph: DependencyGraph, selection: SelectionDistribution, noise: NoiseModel, t: int | None = None
) -> MomentSummary:
    mu, sigma_d2 = population_degree_moments(graph, selection)
    pmf = degree_law(graph, selection) if isinstance(noise, StrictHeteroscedastic) else None
    sigma_eps2, cov = population_residual_moments(noise, sigma_d2, pmf)
    return MomentSummary(graph.timestep if t is None else t, mu, sigma_d2, sigma_eps2, cov, POPULATION)


# -- closed forms ------------------------------------------------------------


def burden_closed_form(params: EffortParams, mu: float) -> float:
    return params.alpha * mu + params.beta


def uncertainty_closed_form(params: EffortParams, sigma_d2: float, sigma_eps2: float, cov_d_eps: float) -> float:
    """alpha^2 sigma_d^2 + sigma_eps^2 + 2 alpha c; reduces to the uncorrelated form when c = 0."""
    if sigma_d2 < 0 or sigma_eps2 < 0:
        raise ValueError("variances must be >= 0")
    a = params.alpha
    structural = a * a * sigma_d2
    cross = 2.0 * a * cov_d_eps
    u = structural + sigma_eps2 + cross
    if u < 0:
        scale = structural + sigma_eps2 + abs(cross)
        if u < -1e-12 * max(scale, 1.0):
            raise NegativeUncertaintyError(
                f"uncertainty {u} < 0: covariance {cov_d_eps} is inconsistent with the variances"
            )
        u = 0.0
    return u


def poc_state(summary: MomentSummary, params: EffortParams) -> PocState:
    return PocState(
        burden_closed_form(params, summary.mu),
        uncertainty_closed_form(params, summary.sigma_d2, summary.sigma_eps2, summary.cov_d_eps),
    )


def deltas(states: Sequence[PocState], t0: int = 0) -> list[DeltaReport]:
    if len(states) < 2:
        raise InsufficientSeriesError(f"need at least 2 states for differences, got {len(states)}")
    return [
        DeltaReport(t0 + i, b.burden - a.burden, b.uncertainty - a.uncertainty)
        for i, (a, b) in enumerate(zip(states, states[1:]))
    ]


# -- empirical path ----------------------------------------------------------


def empirical_summary_arrays(t: int, degrees, efforts, params: EffortParams) -> MomentSummary:
    """Empirical summary from aligned degree/effort columns."""
    d = np.asarray(degrees, dtype=float)
    e = np.asarray(efforts, dtype=float)
    n = len(d)
    if n < 2:
        raise InsufficientDataError(f"step t={t} has {n} event(s); need at least 2", t=t)
    resid = e - params.alpha * d - params.beta
    mu = float(d.mean())
    dc = d - mu
    rc = resid - resid.mean()
    sigma_d2 = float(dc @ dc) / (n - 1)
    sigma_eps2 = float(rc @ rc) / (n - 1)
    cov = float(dc @ rc) / (n - 1)
    return MomentSummary(t, mu, sigma_d2, sigma_eps2, cov, EMPIRICAL, n)


def empirical_moment_summary(events: Sequence[ChangeEvent], params: EffortParams) -> MomentSummary:
    if len(events) < 2:
        t = events[0].t if events else None
        raise InsufficientDataError(f"need at least 2 events, got {len(events)}", t=t)
    ts = {ev.t for ev in events}
    if len(ts) != 1:
        raise MixedTimestepError(f"events span several timesteps: {sorted(ts)}")
    return empirical_summary_arrays(
        events[0].t, [ev.degree_at_change for ev in events], [ev.effort for ev in events], params
    )


@dataclass(frozen=True)
class FitDiagnostics:
    alpha: float
    beta: float
    se_alpha: float
    se_beta: float
    residual_variance: float
    r_squared: float
    n: int
    admissible: bool
    message: str = ""


def ols_fit(degrees, efforts) -> FitDiagnostics:
    d = np.asarray(degrees, dtype=float)
    e = np.asarray(efforts, dtype=float)
    n = len(d)
    if n < 2 or np.all(d == d[0]):
        raise DegenerateDesignError("effort fit needs at least 2 distinct degree values")
    dm, em = d.mean(), e.mean()
    dc = d - dm
    sxx = float(dc @ dc)
    slope = float(dc @ (e - em)) / sxx
    intercept = float(em - slope * dm)
    resid = e - (slope * d + intercept)
    sse = float(resid @ resid)
    sst = float((e - em) @ (e - em))
    dof = n - 2
    s2 = sse / dof if dof > 0 else float("nan")
    se_slope = math.sqrt(s2 / sxx) if dof > 0 else float("nan")
    se_intercept = math.sqrt(s2 * (1.0 / n + dm * dm / sxx)) if dof > 0 else float("nan")
    r2 = 1.0 - sse / sst if sst > 0 else 1.0
    problems = []
    if not slope > 0:
        problems.append(f"fitted alpha={slope!r} is not > 0")
    if intercept < 0:
        problems.append(f"fitted beta={intercept!r} is < 0")
    return FitDiagnostics(slope, intercept, se_slope, se_intercept, s2, r2, n, not problems, "; ".join(problems))


def fit_effort_params(events: Sequence[ChangeEvent]) -> tuple[EffortParams | None, FitDiagnostics]:
    """OLS of effort on degree.

    Returns ``(None, diagnostics)`` when the fit lands outside alpha > 0,
    beta >= 0; the raw estimates are never clamped.
    """
    diag = ols_fit([ev.degree_at_change for ev in events], [ev.effort for ev in events])
    params = EffortParams(diag.alpha, diag.beta) if diag.admissible else None
    return params, diag


# -- assumptions, regimes, theorem ------------------------------------------


def _check_consecutive(summaries: Sequence[MomentSummary]) -> None:
    if len(summaries) < 2:
        raise InsufficientSeriesError(f"need at least 2 summaries, got {len(summaries)}")
    for a, b in zip(summaries, summaries[1:]):
        if b.t != a.t + 1:
            raise NonConsecutiveSeriesError(f"summary t={b.t} does not follow t={a.t}")


def check_assumptions(summaries: Sequence[MomentSummary], tolerance: float | None = None) -> list[AssumptionReport]:
    """Evaluate A1-A4 on every consecutive pair.

    ``tolerance=None`` picks 0 for all-population series and
    ``DEFAULT_EMPIRICAL_TOLERANCE`` otherwise. A "holds" check gets the slack
    in its favour; a "strict" check must clear the slack.
    """
    _check_consecutive(summaries)
    if tolerance is None:
        tolerance = 0.0 if all(s.is_population for s in summaries) else DEFAULT_EMPIRICAL_TOLERANCE
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    tol = tolerance
    out = []
    for a, b in zip(summaries, summaries[1:]):
        out.append(
            AssumptionReport(
                t=a.t,
                a1_holds=b.mu >= a.mu - tol,
                a2_holds=b.sigma_d2 <= a.sigma_d2 + tol,
                a3_holds=b.sigma_eps2 <= a.sigma_eps2 + tol,
                a4_holds=b.cov_d_eps <= a.cov_d_eps + tol,
                a2_strict=b.sigma_d2 < a.sigma_d2 - tol,
                a3_strict=b.sigma_eps2 < a.sigma_eps2 - tol,
                a4_strict=b.cov_d_eps < a.cov_d_eps - tol,
                tolerance=tol,
            )
        )
    return out


def classify_regime(delta: DeltaReport) -> RegimeLabel:
    if delta.delta_u < 0:
        if delta.delta_b >= 0:
            return RegimeLabel.STABILIZATION_WITHOUT_SIMPLIFICATION
        return RegimeLabel.SIMPLIFYING_STABILIZATION
    if delta.delta_u > 0:
        if delta.delta_b >= 0:
            return RegimeLabel.BURDENED_DESTABILIZATION
        return RegimeLabel.SIMPLIFYING_DESTABILIZATION
    if delta.delta_u == 0:
        return RegimeLabel.STATIONARY
    raise ValueError(f"delta_u is not a real number: {delta.delta_u!r}")


CONFIRMED = "confirmed"
VACUOUS = "vacuous"
VIOLATION = "violation"


@dataclass(frozen=True)
class StepVerdict:
    t: int
    status: str
    strict: bool
    delta: DeltaReport
    assumptions: AssumptionReport
    reason: str = ""
    before: MomentSummary | None = None
    after: MomentSummary | None = None


@dataclass
class TheoremReport:
    params: EffortParams
    steps: list[StepVerdict] = field(default_factory=list)

    def _count(self, status):
        return sum(1 for s in self.steps if s.status == status)

    @property
    def confirmed(self) -> int:
        return self._count(CONFIRMED)

    @property
    def vacuous(self) -> int:
        return self._count(VACUOUS)

    @property
    def violations(self) -> list[StepVerdict]:
        return [s for s in self.steps if s.status == VIOLATION]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary_line(self) -> str:
        return (
            f"steps: {len(self.steps)}, confirmed: {self.confirmed}, "
            f"vacuous: {self.vacuous}, violations: {len(self.violations)}"
        )

    def to_dict(self) -> dict:
        def verdict(s: StepVerdict):
            d = {
                "t": s.t,
                "status": s.status,
                "strict": s.strict,
                "delta_B": s.delta.delta_b,
                "delta_U": s.delta.delta_u,
                "reason": s.reason,
            }
            if s.status == VIOLATION:
                d["before"] = asdict(s.before)
                d["after"] = asdict(s.after)
            return d

        return {
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "steps": len(self.steps),
            "confirmed": self.confirmed,
            "vacuous": self.vacuous,
            "violations": len(self.violations),
            "verdicts": [verdict(s) for s in self.steps],
        }


def verify_theorem(summaries: Sequence[MomentSummary], params: EffortParams) -> TheoremReport:
    """Check the sufficient-conditions theorem step by step on exact moments.

    Where A1-A4 all hold, burden must not fall and uncertainty must not rise
    (slack ``THEOREM_SLACK``); if one of A2-A4 is strict, uncertainty must
    fall strictly. Steps where A1-A4 fail make no claim and are ``vacuous``.
    """
    for s in summaries:
        if not s.is_population:
            raise EmpiricalSourceError(
                f"theorem verification needs population moments; step t={s.t} is empirical"
            )
    reports = check_assumptions(summaries, tolerance=0.0)
    states = [poc_state(s, params) for s in summaries]
    ds = deltas(states, t0=summaries[0].t)
    report = TheoremReport(params)
    for a, b, rep, d in zip(summaries, summaries[1:], reports, ds):
        strict = rep.any_strict
        if not rep.all_hold:
            failed = [f"A{k}" for k, ok in enumerate((rep.a1_holds, rep.a2_holds, rep.a3_holds, rep.a4_holds), 1) if not ok]
            report.steps.append(StepVerdict(a.t, VACUOUS, strict, d, rep, "unmet: " + ",".join(failed)))
            continue
        problems = []
        if d.delta_b < -THEOREM_SLACK:
            problems.append(f"delta_B={d.delta_b!r} < 0")
        if d.delta_u > THEOREM_SLACK:
            problems.append(f"delta_U={d.delta_u!r} > 0")
        if strict and not d.delta_u < 0:
            problems.append(f"strict A2-A4 but delta_U={d.delta_u!r} is not < 0")
        status = VIOLATION if problems else CONFIRMED
        report.steps.append(StepVerdict(a.t, status, strict, d, rep, "; ".join(problems), a, b))
    return report


# -- resampling --------------------------------------------------------------


def sample_cov(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float((x - x.mean()) @ (y - y.mean())) / (len(x) - 1)


def bootstrap_se(
    statistic: Callable[..., np.ndarray],
    *columns: np.ndarray,
    rng: np.random.Generator,
    n_boot: int = 200,
    chunk: int = 20,
) -> float:
    """Bootstrap standard error of ``statistic`` over paired columns.

    ``statistic`` receives 2-D arrays (one resample per row) and returns one
    value per row.
    """
    columns = [np.asarray(c) for c in columns]
    n = len(columns[0])
    values = []
    done = 0
    while done < n_boot:
        k = min(chunk, n_boot - done)
        idx = rng.integers(0, n, size=(k, n))
        values.append(np.asarray(statistic(*(c[idx] for c in columns))))
        done += k
    return float(np.std(np.concatenate(values), ddof=1))


def rowwise_mean(x):
    return x.mean(axis=1)


def rowwise_var(x):
    return x.var(axis=1, ddof=1)


def rowwise_cov(x, y):
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    return np.einsum("ij,ij->i", xc, yc) / (x.shape[1] - 1)

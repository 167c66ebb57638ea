"""Burden/uncertainty simulation and analysis for evolving dependency graphs."""

__version__ = "0.1.0"

from .change import (
    ChangeEvent,
    EffortParams,
    RelaxedLinear,
    SelectionDistribution,
    StrictHeteroscedastic,
    StrictIndependent,
    sample_change_event,
    sample_noise,
    sample_target,
)
from .graph import DependencyGraph, GraphDelta, apply_delta, out_degree, out_neighborhood
from .ingest import analyze, parse_events, parse_snapshots
from .moments import (
    MomentSummary,
    PocState,
    RegimeLabel,
    burden_closed_form,
    check_assumptions,
    classify_regime,
    deltas,
    empirical_moment_summary,
    fit_effort_params,
    poc_state,
    population_degree_moments,
    population_residual_moments,
    uncertainty_closed_form,
    verify_theorem,
)
from .scenario import Scenario, generate_scenario, run_simulation

__all__ = [
    "__version__",
    "analyze",
    "apply_delta",
    "burden_closed_form",
    "ChangeEvent",
    "check_assumptions",
    "classify_regime",
    "deltas",
    "DependencyGraph",
    "EffortParams",
    "empirical_moment_summary",
    "fit_effort_params",
    "generate_scenario",
    "GraphDelta",
    "MomentSummary",
    "out_degree",
    "out_neighborhood",
    "parse_events",
    "parse_snapshots",
    "poc_state",
    "PocState",
    "population_degree_moments",
    "population_residual_moments",
    "RegimeLabel",
    "RelaxedLinear",
    "run_simulation",
    "sample_change_event",
    "sample_noise",
    "sample_target",
    "Scenario",
    "SelectionDistribution",
    "StrictHeteroscedastic",
    "StrictIndependent",
    "uncertainty_closed_form",
    "verify_theorem",
]

"""Discrete curve-network relaxation over a catalog of candidate topologies."""

from .analysis import (
    CandidateResult,
    PressureEstimate,
    UnrelaxedWarning,
    aligned_hausdorff,
    cocircular_chain_report,
    compare_candidates,
    pressures_estimate,
    run_candidate,
)
from .discrete import DiscreteGraph, TemplateError
from .relax import AREA_TOL, RelaxError, RelaxResult, TopologyEvent, project_areas, relax
from .templates import (
    CATALOG,
    CONJECTURES,
    InfeasibleTemplateError,
    Template,
    catalog_for,
    get_template,
    single_region_template,
    template_instantiate,
)

__all__ = [
    "AREA_TOL",
    "CATALOG",
    "CONJECTURES",
    "CandidateResult",
    "DiscreteGraph",
    "InfeasibleTemplateError",
    "PressureEstimate",
    "RelaxError",
    "RelaxResult",
    "Template",
    "TemplateError",
    "TopologyEvent",
    "UnrelaxedWarning",
    "aligned_hausdorff",
    "catalog_for",
    "cocircular_chain_report",
    "compare_candidates",
    "get_template",
    "pressures_estimate",
    "project_areas",
    "relax",
    "run_candidate",
    "single_region_template",
    "template_instantiate",
]

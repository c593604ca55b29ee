"""Active-learning system reliability analysis.

Per-component Kriging / PC-Kriging surrogates, subset simulation on the
surrogate composition, a system-level deviation number for candidate
selection, density-based clustering of enrichment candidates and total
Sobol' indices to route each enrichment to one limit state.
"""

from .benchmarks import ProblemSpec, four_branch, roof_truss
from .clustering import ClusterLabels, dbscan, default_params
from .composition import eval_composition, parse_composition, pretty, system_mean_lsf
from .inputs import InputModel, Marginal, initial_design_bounds, lhs_sample
from .learning import (
    LearnConfig,
    RunReport,
    Seeds,
    check_convergence,
    filter_candidates,
    run,
    select_enrichment,
    usys,
)
from .sensitivity import ResponseGaussians, select_limit_state, total_sobol
from .subset import SusConfig, SusResult, reliability_index, subset_simulation
from .surrogate import (
    ExperimentalDesign,
    FitOptions,
    SurrogateModel,
    build_pce_basis,
    fit_kriging,
    fit_pck,
    lar_select,
)

__all__ = [
    "ClusterLabels",
    "ExperimentalDesign",
    "FitOptions",
    "InputModel",
    "LearnConfig",
    "Marginal",
    "ProblemSpec",
    "ResponseGaussians",
    "RunReport",
    "Seeds",
    "SurrogateModel",
    "SusConfig",
    "SusResult",
    "build_pce_basis",
    "check_convergence",
    "dbscan",
    "default_params",
    "eval_composition",
    "filter_candidates",
    "fit_kriging",
    "fit_pck",
    "four_branch",
    "initial_design_bounds",
    "lar_select",
    "lhs_sample",
    "parse_composition",
    "pretty",
    "reliability_index",
    "roof_truss",
    "run",
    "select_enrichment",
    "select_limit_state",
    "subset_simulation",
    "system_mean_lsf",
    "total_sobol",
    "usys",
]

__version__ = "0.1.0"

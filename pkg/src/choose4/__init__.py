"""choose4: pre-specified overall-survival safety monitoring designs.

Pick any admissible 4 of the 6 parameters of a single-look OS analysis
(null/alternative hazard ratios, death count, decision threshold, and
the two marginal error rates); the package solves for the rest, chains
looks into monitoring plans, and evaluates joint operating
characteristics under the independent-increments correlation structure.
"""

from .design import (
    PARAMETERS,
    AnalysisSpec,
    ChoicePattern,
    Rounding,
    SolveResult,
    alpha_from,
    deaths_from,
    enumerate_patterns,
    power_from,
    residuals,
    solve,
    threshold_from_alpha,
    threshold_from_beta,
)
from .errors import (
    ArityError,
    CholeskyFailure,
    Choose4Error,
    DomainError,
    Infeasible,
    InsufficientEvents,
    InvalidPattern,
    MonotoneLikelihood,
    NonmonotoneDeaths,
    PatternMismatch,
)
from .jointprob import (
    FirstCrossingResult,
    IntegrationSettings,
    JointProbResult,
    correlation_matrix,
    decision_limits,
    first_crossing,
    mvn_lower_orthant,
    operating_characteristics,
    prob_all_met,
    prob_at_least_one_met,
    prob_flagged_at_least_once,
)
from .plans import (
    STRATEGY_INFO,
    STRATEGY_NAMES,
    DiscreteBand,
    MonitoringPlan,
    PlanStage,
    build_plan,
    custom_plan,
    discrete_approximation,
    discrete_threshold_plan,
    fda_t2d_plan,
    fleming_plan,
    plan_table,
    recompute_for_observed,
    rodriguez_plan,
    snap_to_grid,
    standard_ci_plan,
    threshold_curve,
)
from .simulate import (
    CoxFit,
    EmpiricalOCs,
    Snapshot,
    TrialData,
    TrialScenario,
    empirical_ocs,
    estimate_hr,
    simulate_trial,
    snapshot_at_deaths,
)
from .stats import log_hr_std_error, normal_cdf, normal_quantile

__version__ = "0.1.0"

__all__ = [
    "PARAMETERS",
    "AnalysisSpec",
    "ChoicePattern",
    "Rounding",
    "SolveResult",
    "alpha_from",
    "deaths_from",
    "enumerate_patterns",
    "power_from",
    "residuals",
    "solve",
    "threshold_from_alpha",
    "threshold_from_beta",
    "ArityError",
    "CholeskyFailure",
    "Choose4Error",
    "DomainError",
    "Infeasible",
    "InsufficientEvents",
    "InvalidPattern",
    "MonotoneLikelihood",
    "NonmonotoneDeaths",
    "PatternMismatch",
    "normal_cdf",
    "normal_quantile",
    "log_hr_std_error",
    "FirstCrossingResult",
    "IntegrationSettings",
    "JointProbResult",
    "correlation_matrix",
    "decision_limits",
    "first_crossing",
    "mvn_lower_orthant",
    "operating_characteristics",
    "prob_all_met",
    "prob_at_least_one_met",
    "prob_flagged_at_least_once",
    "CoxFit",
    "EmpiricalOCs",
    "Snapshot",
    "TrialData",
    "TrialScenario",
    "empirical_ocs",
    "estimate_hr",
    "simulate_trial",
    "snapshot_at_deaths",
    "STRATEGY_INFO",
    "STRATEGY_NAMES",
    "DiscreteBand",
    "MonitoringPlan",
    "PlanStage",
    "build_plan",
    "custom_plan",
    "discrete_approximation",
    "discrete_threshold_plan",
    "fda_t2d_plan",
    "fleming_plan",
    "plan_table",
    "recompute_for_observed",
    "rodriguez_plan",
    "snap_to_grid",
    "standard_ci_plan",
    "threshold_curve",
    "__version__",
]

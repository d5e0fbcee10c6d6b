"""Two-phase preference elicitation for cold-start recommendation.

A short static questionnaire (burn-in) followed by adaptive rounds that
maintain a polytope of plausible user embeddings, query the items whose
answers would shrink it fastest, and recommend by distance to the
aggregated Chebyshev center.
"""

from pere.behavior import (
    Rating,
    SimulatedUser,
    experience_probability,
    generate_user,
    rate_item,
)
from pere.data import (
    Catalog,
    Config,
    load_catalog,
    load_config,
    save_catalog,
    synth_catalog,
)
from pere.dpp import (
    Ensemble,
    build_ensemble,
    greedy_map,
    local_search_2swap,
    subset_log_det,
)
from pere.engine import (
    ExperimentResult,
    Scored,
    Session,
    StrategyPlan,
    burn_in,
    plan_for_strategy,
    run_experiment,
    surrogate_probability,
    weighted_kmedoids,
)
from pere.errors import (
    CatalogFormatError,
    ConfigError,
    ExhaustedPoolError,
    InfeasibleRegionError,
    NumericDomainError,
    PereError,
    UnboundedError,
)
from pere.estimation import (
    ExperienceData,
    fit_kappa,
    negative_log_likelihood,
    nll_gradient,
    simulate_experience,
)
from pere.geometry import (
    Cut,
    Preference,
    Region,
    TolerantCenter,
    build_region,
    chebyshev_center,
    chebyshev_center_tolerant,
    contains,
    cut_between,
    cut_distance,
    cuts_from_preferences,
    tolerant_center_with_budget,
)
from pere.lp import (
    LinearProgram,
    LpSolution,
    MipSolution,
    SimplexProgram,
    solve_lp,
    solve_mip_binary,
)
from pere.metrics import (
    Ranking,
    auc_at_k,
    hit_rate_at_k,
    mean_average_precision,
    mrr,
    ndcg_at_k,
)

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "CatalogFormatError",
    "Config",
    "ConfigError",
    "Cut",
    "Ensemble",
    "ExhaustedPoolError",
    "ExperienceData",
    "ExperimentResult",
    "InfeasibleRegionError",
    "LinearProgram",
    "LpSolution",
    "MipSolution",
    "NumericDomainError",
    "PereError",
    "Preference",
    "Ranking",
    "Rating",
    "Region",
    "Scored",
    "Session",
    "SimplexProgram",
    "SimulatedUser",
    "StrategyPlan",
    "TolerantCenter",
    "UnboundedError",
    "auc_at_k",
    "build_ensemble",
    "build_region",
    "burn_in",
    "chebyshev_center",
    "chebyshev_center_tolerant",
    "contains",
    "cut_between",
    "cut_distance",
    "cuts_from_preferences",
    "experience_probability",
    "fit_kappa",
    "generate_user",
    "greedy_map",
    "hit_rate_at_k",
    "load_catalog",
    "load_config",
    "local_search_2swap",
    "mean_average_precision",
    "mrr",
    "ndcg_at_k",
    "negative_log_likelihood",
    "nll_gradient",
    "plan_for_strategy",
    "rate_item",
    "run_experiment",
    "save_catalog",
    "simulate_experience",
    "solve_lp",
    "solve_mip_binary",
    "subset_log_det",
    "surrogate_probability",
    "synth_catalog",
    "tolerant_center_with_budget",
    "weighted_kmedoids",
]

"""Ranking-and-selection toolkit with budget-adaptive allocation rules."""

from .adaptive import (AdaptiveSolution, adaptive_ratios, alpha_factors,
                       clamped_ratios, feasibility_threshold,
                       small_budget_ratios, solve_lambda)
from .apcs import ApcsValue, apcs, numerical_hessian, selection_risk
from .core import (AllocationVector, GapStatistics, ProblemInstance,
                   SampleStats, TrialTrace, gap_statistics, update_stats)
from .engine import (GaussianSource, PcsEstimate, SamplingSource,
                     design_stream, estimate_pcs, estimate_pcs_from_source,
                     run_trial)
from .facloc import (FacilityLocationSource, Order, WarehouseDesign,
                     facloc_source, order_density, paper_designs,
                     sample_order_location, simulate_replication)
from .instances import (example1, example2, example3, example4,
                        three_design_instance)
from .ocba import (InformationRatios, information_ratios,
                   ld_balance_residuals, ocba_ratios)
from .oracle import (numeric_apcs_maximizer, optimal_static_allocation,
                     simplex_grid, static_pcs)
from .policies import (PolicyState, daa_next, ea_next, faa_next,
                       initial_state, most_starving, ocba_seq_next)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveSolution", "AllocationVector", "ApcsValue",
    "FacilityLocationSource", "GapStatistics", "GaussianSource",
    "InformationRatios", "Order", "PcsEstimate", "PolicyState",
    "ProblemInstance", "SampleStats", "SamplingSource", "TrialTrace",
    "WarehouseDesign", "adaptive_ratios", "alpha_factors", "apcs",
    "clamped_ratios", "daa_next", "design_stream", "ea_next",
    "estimate_pcs", "estimate_pcs_from_source", "example1", "example2",
    "example3", "example4", "facloc_source", "faa_next",
    "feasibility_threshold", "gap_statistics", "information_ratios",
    "initial_state", "ld_balance_residuals", "most_starving",
    "numeric_apcs_maximizer", "numerical_hessian", "ocba_ratios",
    "ocba_seq_next", "optimal_static_allocation", "order_density",
    "paper_designs", "run_trial", "sample_order_location", "selection_risk",
    "simplex_grid", "simulate_replication", "small_budget_ratios",
    "solve_lambda", "static_pcs", "three_design_instance", "update_stats",
]

"""Cost-optimal vaccine allocation against SIS epidemics on contact networks."""

from .combinatorial import (
    DiscreteAllocation,
    exhaustive_optimum,
    greedy_forward,
    greedy_reverse,
    marginal_benefit,
    threshold_baseline,
)
from .costs import CostFunction, check_assumption1, cost_eval, total_cost
from .dual import DualCertificate, certificate_gap, dual_value, solve_dual, threshold_fixings
from .dynamics import (
    Trajectory,
    estimate_decay_rate,
    simulate_exact_markov,
    simulate_linear_bound,
    simulate_meanfield,
)
from .fractional import (
    CutBudgetError,
    FractionalAllocation,
    solve_fractional,
    solve_trace_sdp,
    verify_allocation,
)
from .graph import Graph, eigenvector_centrality, load_edge_list, parse_edge_list, serialize_edge_list
from .instance import EpidemicInstance, InfeasibleInstanceError
from .spectral import (
    RateMatrices,
    critical_beta,
    lambda_max_effective,
    psd_project,
    stability_margin,
)

__version__ = "0.1.0"

__all__ = [
    "CostFunction",
    "CutBudgetError",
    "DiscreteAllocation",
    "DualCertificate",
    "EpidemicInstance",
    "FractionalAllocation",
    "Graph",
    "InfeasibleInstanceError",
    "RateMatrices",
    "Trajectory",
    "certificate_gap",
    "check_assumption1",
    "cost_eval",
    "critical_beta",
    "dual_value",
    "eigenvector_centrality",
    "estimate_decay_rate",
    "exhaustive_optimum",
    "greedy_forward",
    "greedy_reverse",
    "lambda_max_effective",
    "load_edge_list",
    "marginal_benefit",
    "parse_edge_list",
    "psd_project",
    "serialize_edge_list",
    "simulate_exact_markov",
    "simulate_linear_bound",
    "simulate_meanfield",
    "solve_dual",
    "solve_fractional",
    "solve_trace_sdp",
    "stability_margin",
    "threshold_baseline",
    "threshold_fixings",
    "total_cost",
    "verify_allocation",
]

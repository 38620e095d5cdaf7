"""Greedy primal-dual solvers for capacity-bounded routing and bundle markets.

Public surface: instance parsing/normalization (`model`), the three solvers
(`ufp`, `muca`, `repeat`), critical-value payments (`mechanism`), exhaustive
ground truth (`oracle`), benchmark generators (`benchgen`), and the
`flowmech` command line (`cli`).
"""

from .model import (BundleRequest, Edge, InfeasibleBoundError, InstanceError,
                    InstanceSemanticError, InstanceSyntaxError, MucaInstance,
                    MucaItem, NormalizedInstance, Request, UfpInstance,
                    normalize, parse_muca_instance, parse_ufp_instance,
                    prenormalized, serialize_muca_instance,
                    serialize_ufp_instance)
from .paths import GraphIndex, Path, shortest_path
from .pricing import PriceLedger, edge_weight
from .ufp import (IterationRecord, SolverInvariantError, UfpSolution,
                  dual_certificate, epsilon_max, guarantee_holds, solve_ufp)
from .muca import MucaIterationRecord, MucaSolution, bundle_score, solve_muca
from .repeat import RepeatSolution, repeat_dual_certificate, solve_ufp_repeat
from .mechanism import (AuditReport, PaymentProfile, critical_payment,
                        run_mechanism, utility_audit)
from .oracle import (DualAssignment, OracleLimitError, brute_force_opt_muca,
                     brute_force_opt_repeat, brute_force_opt_ufp,
                     check_dual_feasible, check_dual_feasible_muca,
                     check_muca_allocation, check_ufp_allocation,
                     enumerate_paths)
from .benchgen import (gen_directed_lb, gen_muca_lb, gen_random,
                       gen_random_muca, gen_undirected_lb)

__all__ = [
    "AuditReport", "BundleRequest", "DualAssignment", "Edge", "GraphIndex",
    "InfeasibleBoundError", "InstanceError", "InstanceSemanticError",
    "InstanceSyntaxError", "IterationRecord", "MucaInstance",
    "MucaIterationRecord", "MucaItem", "MucaSolution", "NormalizedInstance",
    "OracleLimitError", "Path", "PaymentProfile", "PriceLedger",
    "RepeatSolution", "Request", "SolverInvariantError", "UfpInstance",
    "UfpSolution", "brute_force_opt_muca", "brute_force_opt_repeat",
    "brute_force_opt_ufp", "bundle_score", "check_dual_feasible",
    "check_dual_feasible_muca", "check_muca_allocation",
    "check_ufp_allocation", "critical_payment", "dual_certificate",
    "edge_weight", "enumerate_paths", "epsilon_max", "gen_directed_lb",
    "gen_muca_lb", "gen_random", "gen_random_muca", "gen_undirected_lb",
    "guarantee_holds", "normalize", "parse_muca_instance",
    "parse_ufp_instance", "prenormalized", "repeat_dual_certificate",
    "run_mechanism", "serialize_muca_instance", "serialize_ufp_instance",
    "shortest_path", "solve_muca", "solve_ufp", "solve_ufp_repeat",
    "utility_audit",
]

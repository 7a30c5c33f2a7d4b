"""Cross-curvature of optimal transport costs."""

from .constructions import (HopfSubmersion, cpn_curvature_probe, log_cost_quadratic,
                            log_product_counterexample, oneill_compare, product_cost)
from .cost import (LogEuclideanCost, ProductCost, RadialCost, c_exp, c_segment, cost_eval,
                   cross_difference_matrix, grad_x_cost, grad_xbar_cost, h_quadratic, parse_cost,
                   solve_h_velocity)
from .crosscurv import SamplerSpec, alternative_a3_concavity, classify, cross_fd, null_pair
from .errors import (CclabError, ConvergenceError, CutLocusProximity, DegeneracyError,
                     DegeneracyWarning, DomainError, NotNullable, SingularCost)
from .manifold import ComplexProjective, Euclidean, Product, Sphere, dist, exp_map, inner, log_map, parse_manifold
from .reports import VerificationReport
from .sliding_mountain import (SlidingMountainScenario, check_dasm, check_time_convexity, f_eval,
                               g_diagnostics)

__version__ = "0.1.0"

__all__ = [
    "CclabError", "ComplexProjective", "ConvergenceError", "CutLocusProximity", "DegeneracyError",
    "DegeneracyWarning", "DomainError", "Euclidean", "HopfSubmersion", "LogEuclideanCost", "NotNullable",
    "Product", "ProductCost", "RadialCost", "SamplerSpec", "SingularCost", "SlidingMountainScenario",
    "Sphere", "VerificationReport", "alternative_a3_concavity", "c_exp", "c_segment", "check_dasm",
    "check_time_convexity", "classify", "cost_eval", "cpn_curvature_probe", "cross_difference_matrix",
    "cross_fd", "dist", "exp_map", "f_eval", "g_diagnostics", "grad_x_cost", "grad_xbar_cost",
    "h_quadratic", "inner", "log_cost_quadratic", "log_map", "log_product_counterexample", "null_pair",
    "oneill_compare", "parse_cost", "parse_manifold", "product_cost", "solve_h_velocity",
]

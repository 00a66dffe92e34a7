from .gradcheck import (GradCheckReport, central_difference, compare_gradients, grad_check,
                        relative_errors)
from .lp import LpProblem, LpSolution, check_feasible, solve_lp
from .rng import RngStream, rng_stream

__all__ = [
    "GradCheckReport", "central_difference", "compare_gradients", "grad_check", "relative_errors",
    "LpProblem", "LpSolution", "check_feasible", "solve_lp",
    "RngStream", "rng_stream",
]

from .ascent import AscentResult, linear_objective, maximize
from .conjugates import JENSEN_SHANNON, PAIRS, PEARSON, ConjugatePair, get_pair
from .estimate import MetricEstimate, OptimizerConfig
from .fdiv import neural_f_divergence
from .grid import golden_section_max, grid_maximize
from .kernel import gaussian_kernel, mmd
from .kl import kl_gaussian_closed, symmetric_kl, symmetric_kl_closed
from .neural import MeanDifference, neural_distance, neural_distance_exact_1d
from .transport import bl_distance, w1_distance

__all__ = [
    "AscentResult", "linear_objective", "maximize",
    "JENSEN_SHANNON", "PAIRS", "PEARSON", "ConjugatePair", "get_pair",
    "MetricEstimate", "OptimizerConfig",
    "neural_f_divergence",
    "golden_section_max", "grid_maximize",
    "gaussian_kernel", "mmd",
    "kl_gaussian_closed", "symmetric_kl", "symmetric_kl_closed",
    "MeanDifference", "neural_distance", "neural_distance_exact_1d",
    "bl_distance", "w1_distance",
]

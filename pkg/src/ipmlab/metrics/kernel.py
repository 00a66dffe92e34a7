"""Maximum mean discrepancy with a Gaussian kernel."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DomainError, UsageError
from ..measures import EmpiricalMeasure
from .estimate import MetricEstimate


def gaussian_kernel(X: np.ndarray, Y: np.ndarray, bandwidth: float) -> np.ndarray:
    """``exp(-||x - y||^2 / (2 sigma^2))`` for all pairs."""
    return np.exp(-cdist(X, Y, "sqeuclidean") / (2.0 * bandwidth * bandwidth))


def mmd(X: EmpiricalMeasure, Y: EmpiricalMeasure, bandwidth: float = 1.0,
        unbiased: bool = False) -> MetricEstimate:
    """MMD between two samples; biased V-statistic unless ``unbiased``.

    The unbiased U-statistic of MMD^2 can be negative; ``value`` then reports
    ``sqrt(max(mmd2, 0))`` and ``mmd2`` keeps the signed statistic.
    """
    if not bandwidth > 0:
        raise DomainError("kernel bandwidth must be positive")
    if X.dim != Y.dim:
        raise UsageError("samples must share a dimension")
    Kxx = gaussian_kernel(X.points, X.points, bandwidth)
    Kyy = gaussian_kernel(Y.points, Y.points, bandwidth)
    Kxy = gaussian_kernel(X.points, Y.points, bandwidth)
    if unbiased:
        n, m = X.n, Y.n
        if n < 2 or m < 2:
            raise UsageError("unbiased MMD needs at least two points per sample")
        mmd2 = ((Kxx.sum() - np.trace(Kxx)) / (n * (n - 1))
                + (Kyy.sum() - np.trace(Kyy)) / (m * (m - 1))
                - 2.0 * Kxy.mean())
    else:
        wx, wy = X.weights, Y.weights
        mmd2 = wx @ Kxx @ wx + wy @ Kyy @ wy - 2.0 * wx @ Kxy @ wy
    mmd2 = float(mmd2)
    return MetricEstimate(np.sqrt(max(mmd2, 0.0)), "mmd", "exact",
                          extra={"mmd2": mmd2, "bandwidth": bandwidth, "unbiased": unbiased})

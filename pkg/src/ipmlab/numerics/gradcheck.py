"""Central-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_STEP = 1e-5


@dataclass
class GradCheckReport:
    max_rel_error: float
    errors: np.ndarray
    step: float
    reliable: bool = True

    def passed(self, tol: float) -> bool:
        return self.reliable and self.max_rel_error < tol


def central_difference(fun: Callable[[np.ndarray], float], x: np.ndarray,
                       h: float = DEFAULT_STEP) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        grad.flat[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return grad


def relative_errors(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    return np.abs(analytic - numeric) / np.maximum(1.0, np.abs(analytic))


def compare_gradients(analytic, fun, x, h: float = DEFAULT_STEP,
                      reliable: bool = True) -> GradCheckReport:
    numeric = central_difference(fun, x, h)
    err = relative_errors(analytic, numeric)
    return GradCheckReport(float(err.max(initial=0.0)), err, h, reliable)


def grad_check(family, theta, points, h: float = DEFAULT_STEP) -> GradCheckReport:
    """Check the parameter gradient of the batch mean of ``f_theta`` over ``points``.

    When ``theta`` sits within ``h`` of the parameter-domain boundary the
    report is still produced but flagged ``reliable=False``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    coeffs = np.full(points.shape[0], 1.0 / points.shape[0])
    analytic = family.grad_params(theta, points, coeffs)

    def mean_value(t):
        return float(np.mean(family.eval_batch(t, points)))

    return compare_gradients(analytic, mean_value, theta, h,
                             reliable=family.is_interior(theta, h))

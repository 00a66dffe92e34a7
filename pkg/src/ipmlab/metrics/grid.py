"""Exhaustive grid search over families with one or two degrees of freedom."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..errors import UsageError

DEFAULT_RESOLUTION_1D = 4001
DEFAULT_RESOLUTION_2D = 401
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fun: Callable[[float], float], lo: float, hi: float,
                       iters: int = 60) -> tuple[float, float]:
    """Maximize a unimodal scalar function on ``[lo, hi]``; returns ``(u, fun(u))``."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def grid_maximize(family, score_many: Callable[[np.ndarray], np.ndarray], *,
                  resolution: int | None = None, symmetrize: bool = True):
    """Best ``(value, theta, sign)`` over a dense chart grid plus golden refinement.

    ``score_many`` maps a stack of parameter vectors to objective values.
    """
    if family.n_params == 0:
        v = float(score_many(np.zeros((1, 0)))[0])
        sign = -1.0 if symmetrize and v < 0 else 1.0
        return sign * v, np.zeros(0), sign
    bounds, to_theta = family.chart()
    dof = len(bounds)
    if dof > 2:
        raise UsageError("grid-exact search supports at most 2 degrees of freedom")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION_1D if dof == 1 else DEFAULT_RESOLUTION_2D
    axes = [np.linspace(lo, hi, resolution) for lo, hi in bounds]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dof)
    thetas = np.stack([to_theta(u) for u in mesh])
    values = np.asarray(score_many(thetas), dtype=np.float64)
    signs = (1.0, -1.0) if symmetrize else (1.0,)

    best = (-np.inf, None, 1.0)
    for sign in signs:
        k = int(np.argmax(sign * values))
        if sign * values[k] > best[0]:
            best = (sign * values[k], mesh[k].copy(), sign)
    value, u, sign = best

    def scalar(point):
        return sign * float(score_many(to_theta(point)[None, :])[0])

    # one golden-section pass per axis inside the neighbouring grid cells
    step = [(hi - lo) / (resolution - 1) for lo, hi in bounds]
    for axis in range(dof):
        lo = max(bounds[axis][0], u[axis] - step[axis])
        hi = min(bounds[axis][1], u[axis] + step[axis])

        def along(t, axis=axis):
            point = u.copy()
            point[axis] = t
            return scalar(point)

        t, v = golden_section_max(along, lo, hi)
        if v > value:
            value = v
            u = u.copy()
            u[axis] = t
    return float(value), to_theta(u), sign

"""Projected gradient ascent with restarts and a running max.

The returned value is the best objective actually evaluated, so it is a valid
lower bound on the supremum regardless of whether the ascent converged.
Restart ``r`` draws its initial point from ``stream.substream(r)``; a larger
budget (more restarts or more steps under the same seed) therefore visits a
superset of candidates and can only raise the result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from ..numerics.rng import RngStream
from .estimate import OptimizerConfig

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass
class AscentResult:
    value: float
    theta: np.ndarray
    sign: float
    evaluations: int


def linear_objective(family, X: np.ndarray, coeffs: np.ndarray) -> Objective:
    """``theta -> sum_i c_i f_theta(x_i)`` with its exact gradient."""

    def objective(theta):
        vals, grad = family.value_and_grad(theta, X, coeffs)
        return float(coeffs @ vals), grad

    return objective


def maximize(family, objective: Objective, cfg: OptimizerConfig, *, symmetrize: bool = True,
             stream: RngStream | None = None, candidates: Iterable[np.ndarray] = (),
             value_only: Callable[[np.ndarray], float] | None = None) -> AscentResult:
    """Maximize ``objective`` (or ``|objective|`` under ``symmetrize``) over ``family``."""
    stream = stream if stream is not None else RngStream(cfg.seed, 0)
    signs = (1.0, -1.0) if symmetrize else (1.0,)
    score = value_only if value_only is not None else (lambda t: objective(t)[0])
    best = AscentResult(-np.inf, np.zeros(family.n_params), 1.0, 0)

    def consider(value, theta, sign):
        best.evaluations += 1
        if sign * value > best.value:
            best.value = sign * value
            best.theta = theta.copy()
            best.sign = sign

    for theta in candidates:
        theta = family.project(np.asarray(theta, dtype=np.float64))
        v = score(theta)
        for sign in signs:
            consider(v, theta, sign)

    if family.n_params == 0:
        theta = np.zeros(0)
        v = score(theta)
        for sign in signs:
            consider(v, theta, sign)
        return best

    for r in range(cfg.restarts):
        init = family.project(family.random_init(stream.substream(r)))
        for sign in signs:
            theta = init.copy()
            acc = np.zeros_like(theta)
            for _ in range(cfg.steps):
                v, g = objective(theta)
                consider(v, theta, sign)
                g = sign * g
                if cfg.rule == "rmsprop":
                    acc = cfg.rho * acc + (1.0 - cfg.rho) * g * g
                    theta = theta + cfg.step_size * g / (np.sqrt(acc) + cfg.eps)
                else:
                    theta = theta + cfg.step_size * g
                theta = family.project(theta)
            consider(score(theta), theta, sign)
    return best

"""Neural f-divergence ``sup_f E_P f - E_Q f - E_Q psi*(f)`` over ``sigma o f0``."""

from __future__ import annotations

import numpy as np

from ..discriminators import FGanWrapped
from ..measures import EmpiricalMeasure
from ..numerics.rng import RngStream
from .ascent import maximize
from .conjugates import ConjugatePair
from .estimate import MetricEstimate, OptimizerConfig
from .grid import grid_maximize


class PenalizedObjective:
    """Objective and gradient for a wrapped family ``f = sigma(f0)``."""

    def __init__(self, wrapped: FGanWrapped, P: EmpiricalMeasure, Q: EmpiricalMeasure):
        self.family = wrapped
        self.pair = wrapped.pair
        self.P, self.Q = P, Q
        self.X = np.vstack([P.points, Q.points])
        self.n_p = P.n

    def _terms(self, f):
        fp, fq = f[..., :self.n_p], f[..., self.n_p:]
        return fp @ self.P.weights - fq @ self.Q.weights - self.pair.psi_star(fq) @ self.Q.weights

    def __call__(self, theta):
        f = self.family.eval_batch(theta, self.X)
        fq = f[self.n_p:]
        coeffs = np.concatenate([self.P.weights,
                                 -self.Q.weights * (1.0 + self.pair.psi_star_grad(fq))])
        _, grad = self.family.value_and_grad(theta, self.X, coeffs)
        return float(self._terms(f)), grad

    def value(self, theta) -> float:
        return float(self._terms(self.family.eval_batch(theta, self.X)))

    def many(self, thetas) -> np.ndarray:
        return self._terms(self.family.eval_many(thetas, self.X))


def _wrap(core, pair: ConjugatePair) -> FGanWrapped:
    pair.validate()
    return core if isinstance(core, FGanWrapped) else FGanWrapped(core, pair)


def neural_f_divergence(P: EmpiricalMeasure, Q: EmpiricalMeasure, core, pair: ConjugatePair,
                        cfg: OptimizerConfig | None = None, *, grid: bool = False,
                        resolution: int | None = None, stream: RngStream | None = None
                        ) -> MetricEstimate:
    """Lower bound on the neural f-divergence; the constant ``b0`` always scores 0.

    With ``grid=True`` the core family must have at most two degrees of
    freedom and an exhaustive grid replaces the ascent.
    """
    family = _wrap(core, pair)
    objective = PenalizedObjective(family, P, Q)
    if grid:
        value, theta, _ = grid_maximize(family, objective.many, resolution=resolution,
                                        symmetrize=False)
        semantics, prov = "exact", {"resolution": resolution}
    else:
        cfg = cfg or OptimizerConfig()
        res = maximize(family, objective, cfg, symmetrize=False, stream=stream,
                       value_only=objective.value)
        value, theta = res.value, res.theta
        semantics, prov = "lower_bound", {"restarts": cfg.restarts, "steps": cfg.steps}
    # the constant function b0 has psi*(b0) = 0 and zero mean difference
    b0_wins = value <= 0.0
    est = MetricEstimate(0.0 if b0_wins else value, f"fdiv_{pair.name}", semantics,
                         best_theta=None if b0_wins else theta,
                         extra={"b0_candidate": b0_wins, **prov})
    return est

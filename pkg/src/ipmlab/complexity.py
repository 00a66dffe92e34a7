"""Rademacher complexity: Monte-Carlo estimates, analytic constants, spectral complexity."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, UsageError
from .metrics.ascent import linear_objective, maximize
from .metrics.estimate import OptimizerConfig
from .numerics.rng import RngStream


@dataclass
class RademacherEstimate:
    value: float
    std_error: float
    trials: int
    per_trial: np.ndarray
    best_thetas: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "trials": self.trials,
                "per_trial": [float(v) for v in self.per_trial]}


def rademacher_signs(rng: RngStream, trial: int, m: int) -> np.ndarray:
    """Signs of trial ``trial``; a pure function of the stream, trial index and m."""
    return rng.substream(trial).substream(0).rademacher(m)


def empirical_rademacher(family, X, trials: int = 30, cfg: OptimizerConfig | None = None,
                         rng: RngStream | None = None, *, symmetrize: bool = True,
                         flip_signs: bool = False,
                         candidates: Sequence[Sequence[np.ndarray]] | None = None
                         ) -> RademacherEstimate:
    """Mean over trials of ``max_theta (2/m) sum_i tau_i f_theta(x_i)``.

    Each trial's inner max is a lower bound (projected ascent).  With the
    default ``symmetrize`` both ``f`` and ``-f`` are scored, which makes every
    trial value nonnegative.  ``candidates[t]`` adds fixed parameter vectors to
    trial ``t``; ``flip_signs`` negates every sign vector (pairing test).
    """
    cfg = cfg or OptimizerConfig()
    rng = rng if rng is not None else RngStream(cfg.seed, 0x7AD)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    m = X.shape[0]
    if trials < 1 or m < 1:
        raise UsageError("need at least one trial and one point")
    values, thetas = np.empty(trials), []
    for t in range(trials):
        tau = rademacher_signs(rng, t, m)
        if flip_signs:
            tau = -tau
        coeffs = 2.0 * tau / m
        objective = linear_objective(family, X, coeffs)
        res = maximize(family, objective, cfg, symmetrize=symmetrize,
                       stream=rng.substream(t).substream(1),
                       candidates=candidates[t] if candidates is not None else ())
        values[t] = res.value
        thetas.append(res.theta)
    se = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return RademacherEstimate(float(values.mean()), se, trials, values, thetas)


ANALYTIC_KINDS = ("relu_neuron", "rkhs", "bounded_lipschitz", "total_variation")


def rademacher_bound_analytic(kind: str, m: int, *, C_k: float | None = None,
                              d: int | None = None) -> float:
    """Closed-form complexity constants for the shipped families."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if kind == "relu_neuron":
        return 2.0 * math.sqrt(2.0) / math.sqrt(m)
    if kind == "rkhs":
        if C_k is None or not C_k > 0:
            raise DomainError("rkhs bound needs a kernel bound C_k > 0")
        return 2.0 * math.sqrt(C_k / m)
    if kind == "bounded_lipschitz":
        if d is None or d <= 2:
            raise DomainError("bounded_lipschitz rate m^(-1/d) holds only for d > 2")
        return m ** (-1.0 / d)
    if kind == "total_variation":
        return 2.0
    raise UsageError(f"unknown analytic kind {kind!r}; known: {ANALYTIC_KINDS}")


# --------------------------------------------------------------------------- #
# spectral normalized complexity


@dataclass(frozen=True)
class LayerBound:
    s: float  # spectral-norm bound
    b: float  # (2,1)-norm bound of (A - M)^T
    rho: float = 1.0  # activation Lipschitz constant


@dataclass
class SpectralComplexityReport:
    layers: list[LayerBound]
    W: int
    R: float

    def recompute(self) -> float:
        return _spectral_formula(self.layers, self.W)

    def to_dict(self) -> dict:
        return {"s": [l.s for l in self.layers], "b": [l.b for l in self.layers],
                "rho": [l.rho for l in self.layers], "W": self.W, "R": self.R}


def _spectral_formula(layers, W) -> float:
    prod = 1.0
    for layer in layers:
        prod *= layer.s * layer.rho
    budget = sum((layer.b / layer.s) ** (2.0 / 3.0) for layer in layers)
    return math.sqrt(math.log(2.0 * W * W)) * prod * budget ** 1.5


def spectral_complexity(layers: Sequence, W: int) -> SpectralComplexityReport:
    """``sqrt(log 2W^2) * prod(s_j rho_j) * (sum (b_i/s_i)^(2/3))^(3/2)``.

    ``layers`` holds :class:`LayerBound` or ``(s, b[, rho])`` tuples.
    """
    parsed = [l if isinstance(l, LayerBound) else LayerBound(*l) for l in layers]
    if not parsed:
        raise DomainError("at least one layer required")
    if W < 1:
        raise DomainError("width W must be >= 1")
    for layer in parsed:
        if not layer.s > 0:
            raise DomainError("spectral bounds s_i must be positive")
        if layer.b < 0:
            raise DomainError("(2,1) bounds b_i must be nonnegative")
        if not layer.rho > 0:
            raise DomainError("Lipschitz constants rho_i must be positive")
    return SpectralComplexityReport(parsed, int(W), _spectral_formula(parsed, W))


def norm_21_transpose(A: np.ndarray) -> float:
    """``||A^T||_{2,1}``: sum of the Euclidean norms of the rows of ``A``."""
    return float(np.linalg.norm(np.asarray(A, dtype=np.float64), axis=1).sum())


def spectral_complexity_from_matrices(mats: Sequence[np.ndarray], references=None,
                                      rho: float = 1.0) -> SpectralComplexityReport:
    """Complexity of concrete weight matrices; reference matrices default to zero."""
    references = references if references is not None else [np.zeros_like(A) for A in mats]
    layers = [LayerBound(float(np.linalg.norm(A, 2)), norm_21_transpose(A - M), rho)
              for A, M in zip(mats, references)]
    W = max(max(A.shape) for A in mats)
    return spectral_complexity(layers, W)


def spectral_rademacher_bound(x_frobenius: float, R: float, m: float) -> float:
    """``(24 ||X||_F R / m)(1 + log(m / (3 ||X||_F R)))``, valid for ``m >= 3 ||X||_F R``."""
    if x_frobenius < 0 or R < 0:
        raise DomainError("||X||_F and R must be nonnegative")
    scale = x_frobenius * R
    if m < 3.0 * scale:
        raise DomainError(f"sample-size condition m >= 3 ||X||_F R violated: "
                          f"m={m} < {3.0 * scale}")
    if scale == 0.0:
        return 0.0
    return 24.0 * scale / m * (1.0 + math.log(m / (3.0 * scale)))

"""Finite-dictionary span machinery.

``f_variation_norm`` computes the smallest ``sum |w_i|`` such that
``w0 + sum w_i f_i`` matches a target on a set of anchor points.  Matching only
on anchors makes this an under-approximation of the functional norm; results
carry ``anchor_restricted=True`` to say so.  Error-decay curves measure the
sup-norm residual on a (denser) evaluation grid that contains the anchors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InvariantViolation, NotInSpanError, UsageError
from .measures import EmpiricalMeasure
from .numerics.lp import LpProblem, solve_lp
from .numerics.rng import RngStream

SOLVER_TOL = 1e-9
DENSE_LP_LIMIT = 2000


def _points(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    return X[:, None] if X.ndim == 1 else X


def _union_rows(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.unique(np.vstack([A, B]), axis=0)


@dataclass
class Dictionary:
    """Finite set of functions with anchor and evaluation grids (anchors are merged into the grid)."""

    features: Callable[[np.ndarray], np.ndarray]
    anchors: np.ndarray
    eval_grid: np.ndarray | None = None
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.anchors = _points(self.anchors)
        grid = self.anchors if self.eval_grid is None else _points(self.eval_grid)
        self.eval_grid = _union_rows(grid, self.anchors)

    @property
    def size(self) -> int:
        return self.features(self.anchors[:1]).shape[1]

    def matrix(self, X) -> np.ndarray:
        return np.asarray(self.features(_points(X)), dtype=np.float64)

    def with_anchors(self, anchors, eval_grid=None) -> "Dictionary":
        return Dictionary(self.features, anchors, eval_grid, list(self.names))

    def extended(self, other: "Dictionary") -> "Dictionary":
        """Union of members (same anchors), for monotonicity checks."""
        f, g = self.features, other.features
        return Dictionary(lambda X: np.hstack([f(X), g(X)]), self.anchors, self.eval_grid,
                          self.names + other.names)


def relu_features(V: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Columns ``max(v_k^T [x; 1], 0)`` for the rows ``v_k`` of ``V``."""
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))

    def features(X):
        X = _points(X)
        return np.maximum(np.hstack([X, np.ones((X.shape[0], 1))]) @ V.T, 0.0)

    return features


def relu_dictionary(V, anchors, eval_grid=None) -> Dictionary:
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    return Dictionary(relu_features(V), anchors, eval_grid, [f"relu{k}" for k in range(V.shape[0])])


def random_relu_dictionary(n: int, dim: int, rng: RngStream, anchors, eval_grid=None) -> Dictionary:
    """``n`` neurons with ``v`` uniform on the unit sphere of R^(dim+1)."""
    return relu_dictionary(rng.unit_sphere(n, dim + 1), anchors, eval_grid)


def monomial_dictionary(dim: int, degree: int, anchors, eval_grid=None,
                        scale: float = 1.0) -> Dictionary:
    """Monomials ``x_i`` (and ``x_i x_j``, i <= j, for degree 2), each times ``scale``.

    The constant is not a member; it is the free coefficient ``w0``.
    """
    if degree not in (1, 2):
        raise UsageError("monomial dictionary degree must be 1 or 2")
    pairs = [(i, j) for i in range(dim) for j in range(i, dim)] if degree == 2 else []
    names = [f"x{i}" for i in range(dim)] + [f"x{i}*x{j}" for i, j in pairs]

    def features(X):
        X = _points(X)
        cols = [X[:, i] for i in range(dim)] + [X[:, i] * X[:, j] for i, j in pairs]
        return scale * np.stack(cols, axis=1)

    return Dictionary(features, anchors, eval_grid, names)


# --------------------------------------------------------------------------- #


@dataclass
class DecompositionResult:
    norm: float
    weights: np.ndarray
    w0: float
    residual: float
    exact: bool
    anchor_restricted: bool = True

    def to_dict(self) -> dict:
        return {"norm": self.norm, "weights": self.weights.tolist(), "w0": self.w0,
                "residual": self.residual, "exact": self.exact,
                "anchor_restricted": self.anchor_restricted}


def _solve(c, A_ub, b_ub, A_eq, b_eq, bounds, solver):
    """Minimize with the dense simplex when small, HiGHS otherwise; returns (status, x)."""
    m = (0 if A_ub is None else A_ub.shape[0]) + (0 if A_eq is None else A_eq.shape[0])
    if solver == "auto":
        solver = "simplex" if max(m, len(c)) <= DENSE_LP_LIMIT else "highs"
    if solver == "simplex":
        blocks, senses, rhs = [], [], []
        if A_ub is not None:
            blocks.append(A_ub)
            senses += ["<="] * A_ub.shape[0]
            rhs.append(b_ub)
        if A_eq is not None:
            blocks.append(A_eq)
            senses += ["="] * A_eq.shape[0]
            rhs.append(b_eq)
        sol = solve_lp(LpProblem(c, np.vstack(blocks), senses, np.concatenate(rhs), bounds))
        return sol.status, sol.x
    if solver != "highs":
        raise UsageError(f"unknown LP solver {solver!r}")
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                  bounds=[(lo, None if hi == np.inf else hi) for lo, hi in bounds], method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    return status, res.x


def _target(g, X) -> np.ndarray:
    return np.asarray(g(X) if callable(g) else g, dtype=np.float64).ravel()


def f_variation_norm(g, dictionary: Dictionary, solver: str = "auto") -> DecompositionResult:
    """Minimal l1 mass of an anchor-exact decomposition ``g = w0 + sum w_i f_i``.

    ``g`` is a callable or its values on ``dictionary.anchors``.
    """
    F = dictionary.matrix(dictionary.anchors)
    target = _target(g, dictionary.anchors)
    n, K = F.shape
    if target.size != n:
        raise UsageError(f"target has {target.size} values for {n} anchors")
    # variables [w+ (K), w- (K), w0 (free)]
    c = np.concatenate([np.ones(2 * K), [0.0]])
    A_eq = np.hstack([F, -F, np.ones((n, 1))])
    bounds = [(0.0, np.inf)] * (2 * K) + [(-np.inf, np.inf)]
    status, x = _solve(c, None, None, A_eq, target, bounds, solver)
    if status == "infeasible":
        raise NotInSpanError("target is not in the span of the dictionary on the anchors")
    if status != "optimal":
        raise InvariantViolation(f"l1 decomposition program reported {status}")
    w = x[:K] - x[K:2 * K]
    w0 = float(x[-1])
    residual = float(np.max(np.abs(F @ w + w0 - target)))
    return DecompositionResult(float(np.abs(w).sum()), w, w0, residual, residual < SOLVER_TOL)


@dataclass
class MomentCheck:
    lhs: float
    rhs: float
    norm: float
    slack: float


def moment_bound_check(g, dictionary: Dictionary, P: EmpiricalMeasure, Q: EmpiricalMeasure,
                       d_F_exact: float) -> MomentCheck:
    """``|E_P g - E_Q g|`` against ``||g||_1 * d_F``, with anchors on the joint support.

    ``g`` must be callable since it is evaluated on both supports.
    """
    if not callable(g):
        raise UsageError("moment_bound_check needs a callable target")
    anchors = _union_rows(P.points, Q.points)
    dec = f_variation_norm(g, dictionary.with_anchors(anchors))
    gp = _target(g, P.points)
    gq = _target(g, Q.points)
    lhs = abs(P.mean(gp) - Q.mean(gq))
    rhs = dec.norm * float(d_F_exact)
    return MomentCheck(lhs, rhs, dec.norm, rhs - lhs)


# --------------------------------------------------------------------------- #


@dataclass
class DecayCurve:
    r: np.ndarray
    epsilon: np.ndarray
    kappa: float | None = None
    fit_residual: float | None = None
    exact: bool = False

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "epsilon"])
            for r, e in zip(self.r, self.epsilon):
                writer.writerow([repr(float(r)), repr(float(e))])
        return path


def error_decay_curve(g, dictionary: Dictionary, r_grid: Sequence[float],
                      solver: str = "auto") -> DecayCurve:
    """``eps(r)``: best sup-norm error on the evaluation grid with ``sum |w_i| <= r``.

    Each ``r`` solves ``min t`` subject to ``|F w + w0 - g| <= t`` on the
    anchors and the l1 budget.  A solution found for a smaller budget is also
    feasible for a larger one, so the reported curve is the running minimum of
    the evaluation-grid errors, which keeps it nonincreasing.
    """
    r_grid = np.asarray(r_grid, dtype=np.float64)
    if r_grid.ndim != 1 or np.any(np.diff(r_grid) <= 0) or np.any(r_grid < 0):
        raise UsageError("r grid must be nonnegative and strictly increasing")
    Fa = dictionary.matrix(dictionary.anchors)
    Fe = dictionary.matrix(dictionary.eval_grid)
    ga = _target(g, dictionary.anchors)
    ge = _target(g, dictionary.eval_grid)
    n, K = Fa.shape
    # variables [w+ (K), w- (K), w0, t]
    c = np.zeros(2 * K + 2)
    c[-1] = 1.0
    ones = np.ones((n, 1))
    A_ub = np.vstack([
        np.hstack([Fa, -Fa, ones, -ones]),  # residual <= t
        np.hstack([-Fa, Fa, -ones, -ones]),  # -residual <= t
        np.concatenate([np.ones(2 * K), [0.0, 0.0]])[None, :],
    ])
    bounds = [(0.0, np.inf)] * (2 * K) + [(-np.inf, np.inf), (0.0, np.inf)]
    eps = np.empty(r_grid.size)
    best = np.inf
    for i, r in enumerate(r_grid):
        b_ub = np.concatenate([ga, -ga, [r]])
        status, x = _solve(c, A_ub, b_ub, None, None, bounds, solver)
        if status != "optimal":
            raise InvariantViolation(f"decay program reported {status} at r={r}")
        w = x[:K] - x[K:2 * K]
        err = float(np.max(np.abs(Fe @ w + x[2 * K] - ge)))
        best = min(best, err)
        eps[i] = best
    return DecayCurve(r_grid, eps)


@dataclass
class DecayFit:
    kappa: float | None
    residual: float | None
    exact: bool
    n_points: int


def fit_decay_exponent(curve: DecayCurve, tol: float = SOLVER_TOL) -> DecayFit:
    """``kappa = -slope`` of the least-squares line of log eps against log r.

    The fit uses every point with ``r > 0`` and ``eps > 10 tol``, i.e. the
    whole range where the error is resolved above solver noise.  If no point
    qualifies the target is flagged as exactly represented.
    """
    r = np.asarray(curve.r, dtype=np.float64)
    e = np.asarray(curve.epsilon, dtype=np.float64)
    keep = (r > 0) & (e > 10.0 * tol)
    if not np.any(keep):
        curve.exact = True
        return DecayFit(None, None, True, 0)
    r, e = r[keep], e[keep]
    if r.size < 4:
        raise UsageError("need at least 4 positive epsilon values above tolerance")
    x, y = np.log(r), np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    curve.kappa, curve.fit_residual = float(-slope), resid
    return DecayFit(float(-slope), resid, False, int(r.size))


def decay_moment_bound(curve: DecayCurve, d_F: float) -> float:
    """``min_r 2 eps(r) + r d_F`` over the curve's grid."""
    return float(np.min(2.0 * curve.epsilon + curve.r * d_F))


# --------------------------------------------------------------------------- #


@dataclass
class DensityTable:
    n: np.ndarray
    error: np.ndarray

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "error"])
            for n, e in zip(self.n, self.error):
                writer.writerow([int(n), repr(float(e))])
        return path


def span_density_check(g, grid, n_grid: Sequence[int], rng: RngStream,
                       planted: np.ndarray | None = None) -> DensityTable:
    """Sup-norm error of least-squares fits by ``n`` random unit-norm ReLU neurons plus intercept.

    ``planted`` rows are appended to every dictionary (recovery checks).
    """
    X = _points(grid)
    target = _target(g, X)
    if not np.all(np.isfinite(target)):
        raise UsageError("target must be finite on the grid")
    errors = np.empty(len(n_grid))
    for i, n in enumerate(n_grid):
        V = rng.substream(i).unit_sphere(int(n), X.shape[1] + 1)
        if planted is not None:
            V = np.vstack([V, np.atleast_2d(planted)])
        design = np.hstack([relu_features(V)(X), np.ones((X.shape[0], 1))])
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        errors[i] = float(np.max(np.abs(design @ coef - target)))
    return DensityTable(np.asarray(n_grid, dtype=int), errors)


def unit_ball_grid(dim: int, per_axis: int) -> np.ndarray:
    """Regular grid on ``[-1, 1]^dim`` restricted to the closed unit ball."""
    axes = [np.linspace(-1.0, 1.0, per_axis)] * dim
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    return mesh[np.linalg.norm(mesh, axis=1) <= 1.0 + 1e-12]


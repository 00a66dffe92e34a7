"""Exact bounded-Lipschitz and Wasserstein-1 distances between finite measures.

Both are linear programs.  Small instances go to the package's dense simplex;
larger ones (up to the 400-point support limit) to scipy's HiGHS, which
accepts the same formulation in sparse form.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from ..errors import InvariantViolation, ScaleError, UsageError
from ..measures import EmpiricalMeasure
from ..numerics.lp import LpProblem, solve_lp
from .estimate import MetricEstimate

MAX_SUPPORT = 400
DENSE_LP_LIMIT = 2000  # rows and columns handled by the dense simplex


def _merged_support(P: EmpiricalMeasure, Q: EmpiricalMeasure):
    if P.dim != Q.dim:
        raise UsageError("measures must share a dimension")
    pts = np.vstack([P.points, Q.points])
    uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    mass = np.zeros(uniq.shape[0])
    np.add.at(mass, inverse[:P.n], P.weights)
    np.add.at(mass, inverse[P.n:], -Q.weights)
    if uniq.shape[0] > MAX_SUPPORT:
        raise ScaleError(f"combined support {uniq.shape[0]} exceeds the LP limit {MAX_SUPPORT}")
    return uniq, mass


def _pick_solver(solver: str, rows: int, cols: int) -> str:
    if solver not in ("auto", "simplex", "highs"):
        raise UsageError(f"unknown LP solver {solver!r}")
    if solver == "auto":
        return "simplex" if max(rows, cols) <= DENSE_LP_LIMIT else "highs"
    return solver


def _highs(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None):
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0:
        raise InvariantViolation(f"HiGHS failed on a feasible bounded LP: {res.message}")
    return float(res.fun), res.x


def bl_distance(P: EmpiricalMeasure, Q: EmpiricalMeasure, solver: str = "auto") -> MetricEstimate:
    """``sup {E_P f - E_Q f : |f| <= 1, |f(x) - f(y)| <= ||x - y||}`` over the support."""
    pts, mass = _merged_support(P, Q)
    n = pts.shape[0]
    if n == 1:
        return MetricEstimate(0.0, "bl", "exact", extra={"solver": "none"})
    D = cdist(pts, pts)
    j, k = np.triu_indices(n, 1)
    n_pairs = j.size
    # rows: f_j - f_k <= d_jk and f_k - f_j <= d_jk
    rows = np.arange(2 * n_pairs)
    cols = np.concatenate([j, k, k, j])
    vals = np.concatenate([np.ones(n_pairs), -np.ones(n_pairs), np.ones(n_pairs), -np.ones(n_pairs)])
    A = sparse.coo_matrix((vals, (np.concatenate([rows[:n_pairs], rows[:n_pairs],
                                                   rows[n_pairs:], rows[n_pairs:]]), cols)),
                          shape=(2 * n_pairs, n)).tocsr()
    b = np.concatenate([D[j, k], D[j, k]])
    which = _pick_solver(solver, 2 * n_pairs, n)
    if which == "simplex":
        sol = solve_lp(LpProblem(mass, A.toarray(), ["<="] * (2 * n_pairs), b,
                                 bounds=[(-1.0, 1.0)] * n, maximize=True))
        if not sol.optimal:
            raise InvariantViolation(f"BL program reported {sol.status}")
        value, f = sol.value, sol.x
    else:
        neg, f = _highs(-mass, A_ub=A, b_ub=b, bounds=[(-1.0, 1.0)] * n)
        value = -neg
    return MetricEstimate(max(value, 0.0), "bl", "exact",
                          extra={"solver": which, "support": n, "witness": f.tolist()})


def w1_distance(P: EmpiricalMeasure, Q: EmpiricalMeasure, solver: str = "auto") -> MetricEstimate:
    """Optimal transport cost with Euclidean ground cost (primal program)."""
    if P.dim != Q.dim:
        raise UsageError("measures must share a dimension")
    xs, a = P.support()
    ys, b = Q.support()
    if xs.shape[0] + ys.shape[0] > MAX_SUPPORT:
        raise ScaleError(f"combined support exceeds the LP limit {MAX_SUPPORT}")
    n, m = xs.shape[0], ys.shape[0]
    C = cdist(xs, ys).ravel()
    # row sums = a, column sums = b
    r_idx = np.concatenate([np.repeat(np.arange(n), m), n + np.tile(np.arange(m), n)])
    c_idx = np.concatenate([np.arange(n * m), np.arange(n * m)])
    A = sparse.coo_matrix((np.ones(2 * n * m), (r_idx, c_idx)), shape=(n + m, n * m)).tocsr()
    rhs = np.concatenate([a, b])
    which = _pick_solver(solver, n + m, n * m)
    if which == "simplex":
        sol = solve_lp(LpProblem(C, A.toarray(), ["="] * (n + m), rhs))
        if not sol.optimal:
            raise InvariantViolation(f"transport program reported {sol.status}")
        value, plan = sol.value, sol.x
    else:
        value, plan = _highs(C, A_eq=A, b_eq=rhs, bounds=[(0, None)] * (n * m))
    return MetricEstimate(max(value, 0.0), "w1", "exact",
                          extra={"solver": which, "plan": plan.reshape(n, m).tolist()})

"""Dense two-phase simplex with Bland's anti-cycling rule.

Desk-scale only (a few thousand rows/columns at most).  The tableau is a
plain float64 array; every pivot is a rank-one update.  Bland's rule makes
the pivot sequence, and therefore the returned vertex, a deterministic
function of the problem data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import UsageError

PIVOT_TOL = 1e-9
PIVOT_REL = 1e-7  # pivot entries below this fraction of the column max are skipped
_SENSES = ("<=", "=", ">=")


@dataclass
class LpProblem:
    """min (or max) c @ x  s.t.  A @ x (sense) b,  lo <= x <= hi."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    bounds: Sequence[tuple[float, float]] | None = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64).ravel()
        n = self.c.size
        A = np.asarray(self.A, dtype=np.float64)
        if A.size == 0:
            A = np.zeros((len(self.senses), n))
        elif A.ndim == 1:
            A = A.reshape(1, -1)
        self.A = A
        self.b = np.asarray(self.b, dtype=np.float64).ravel()
        self.senses = list(self.senses)
        m = self.A.shape[0]
        if self.A.ndim != 2 or self.A.shape != (m, n) or self.b.size != m or len(self.senses) != m:
            raise UsageError(
                f"inconsistent LP dimensions: c={n}, A={self.A.shape}, "
                f"b={self.b.size}, senses={len(self.senses)}")
        bad = [s for s in self.senses if s not in _SENSES]
        if bad:
            raise UsageError(f"unknown constraint senses {bad}")
        if self.bounds is None:
            self.bounds = [(0.0, np.inf)] * n
        self.bounds = [(float(lo), float(hi)) for lo, hi in self.bounds]
        if len(self.bounds) != n:
            raise UsageError("one (lower, upper) bound pair per variable required")
        for lo, hi in self.bounds:
            if lo == np.inf or hi == -np.inf or lo > hi:
                raise UsageError(f"empty variable interval [{lo}, {hi}]")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    value: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Tableau:
    def __init__(self, T: np.ndarray, basis: list[int]):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, r: int, e: int, cost: np.ndarray) -> None:
        T = self.T
        T[r] /= T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        cost -= cost[e] * T[r]
        # degenerate rows drift slightly negative; snap them back to zero
        rhs = T[:, -1]
        rhs[(rhs < 0) & (rhs > -PIVOT_TOL)] = 0.0
        self.basis[r] = e
        self.iterations += 1

    def run(self, cost: np.ndarray, allowed: int, max_iter: int) -> str:
        """Iterate Bland pivots on columns ``< allowed``; returns a status."""
        T = self.T
        while True:
            neg = np.nonzero(cost[:allowed] < -PIVOT_TOL)[0]
            if neg.size == 0:
                return "optimal"
            if self.iterations >= max_iter:
                return "iteration_limit"
            e = int(neg[0])
            column = T[:, e]
            floor = max(PIVOT_TOL, PIVOT_REL * float(np.abs(column).max(initial=0.0)))
            rows = np.nonzero(column > floor)[0]
            if rows.size == 0:
                return "unbounded"
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
            r = int(min(ties, key=lambda i: self.basis[i]))
            self.pivot(r, e, cost)


def _standard_form(problem: LpProblem):
    """Rewrite as min c_s y, A_s y = b_s >= 0, y >= 0 plus a recovery map."""
    m, n = problem.shape
    cols: list[list[tuple[int, float]]] = []
    offsets = np.zeros(n)
    ncols = 0
    extra_rows = []  # (col, upper) rows: y_col <= upper
    for j, (lo, hi) in enumerate(problem.bounds):
        if np.isfinite(lo):
            offsets[j] = lo
            cols.append([(ncols, 1.0)])
            if np.isfinite(hi):
                extra_rows.append((ncols, hi - lo))
            ncols += 1
        elif np.isfinite(hi):
            offsets[j] = hi
            cols.append([(ncols, -1.0)])
            ncols += 1
        else:
            cols.append([(ncols, 1.0), (ncols + 1, -1.0)])
            ncols += 2

    expand = np.zeros((n, ncols))
    for j, entries in enumerate(cols):
        for k, coef in entries:
            expand[j, k] = coef

    rows_A = problem.A @ expand
    rows_b = problem.b - problem.A @ offsets
    senses = list(problem.senses)
    if extra_rows:
        U = np.zeros((len(extra_rows), ncols))
        for i, (k, up) in enumerate(extra_rows):
            U[i, k] = 1.0
        rows_A = np.vstack([rows_A, U])
        rows_b = np.concatenate([rows_b, [up for _, up in extra_rows]])
        senses += ["<="] * len(extra_rows)

    sign = 1.0 if not problem.maximize else -1.0
    c_s = sign * (problem.c @ expand)
    return rows_A, rows_b, senses, c_s, expand, offsets


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem``; infeasibility, unboundedness and the pivot cap come back as a status.

    ``max_iter`` defaults to 50 * (rows + columns) of the standard form.
    """
    A, b, senses, c, expand, offsets = _standard_form(problem)
    m, ny = A.shape
    if max_iter is None:
        max_iter = 50 * (m + ny + len(senses))
    n_slack = sum(1 for s in senses if s != "=")

    # columns: [y | slacks | artificials | rhs]
    M = np.zeros((m, ny + n_slack))
    M[:, :ny] = A
    rhs = b.copy()
    slack_of_row = [-1] * m
    k = ny
    for i, s in enumerate(senses):
        if s == "<=":
            M[i, k] = 1.0
            slack_of_row[i] = k
            k += 1
        elif s == ">=":
            M[i, k] = -1.0
            slack_of_row[i] = k
            k += 1
    flip = rhs < 0
    M[flip] *= -1.0
    rhs[flip] *= -1.0

    basis: list[int] = []
    art_rows = []
    for i in range(m):
        sk = slack_of_row[i]
        if sk >= 0 and M[i, sk] > 0:
            basis.append(sk)
        else:
            basis.append(-1)
            art_rows.append(i)
    n_real = ny + n_slack
    n_art = len(art_rows)
    T = np.zeros((m, n_real + n_art + 1))
    T[:, :n_real] = M
    T[:, -1] = rhs
    for a, i in enumerate(art_rows):
        T[i, n_real + a] = 1.0
        basis[i] = n_real + a
    tab = _Tableau(T, basis)

    if n_art:
        cost1 = np.zeros(n_real + n_art + 1)
        cost1[n_real:n_real + n_art] = 1.0
        for i in art_rows:
            cost1 -= T[i]
        if tab.run(cost1, n_real + n_art, max_iter) == "iteration_limit":
            return LpSolution("iteration_limit", iterations=tab.iterations)
        scale = max(1.0, float(np.abs(rhs).max(initial=0.0)))
        if -cost1[-1] > 1e-8 * scale:
            return LpSolution("infeasible", iterations=tab.iterations)
        # drive remaining artificials out of the basis, dropping redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n_real:
                nz = np.nonzero(np.abs(tab.T[i, :n_real]) > PIVOT_TOL)[0]
                if nz.size:
                    tab.pivot(i, int(nz[0]), cost1)
                    keep.append(i)
            else:
                keep.append(i)
        tab.T = np.hstack([tab.T[keep, :n_real], tab.T[keep, -1:]])
        tab.basis = [tab.basis[i] for i in keep]

    full_c = np.zeros(n_real + 1)
    full_c[:ny] = c
    cost = full_c.copy()
    for i, j in enumerate(tab.basis):
        cost -= full_c[j] * tab.T[i]
    status = tab.run(cost, n_real, max_iter)
    if status != "optimal":
        return LpSolution(status, iterations=tab.iterations)

    y = np.zeros(n_real)
    for i, j in enumerate(tab.basis):
        y[j] = tab.T[i, -1]
    y = np.maximum(y[:ny], 0.0)
    x = offsets + expand @ y
    return LpSolution("optimal", float(problem.c @ x), x, tab.iterations)


def check_feasible(problem: LpProblem, x: np.ndarray, tol: float = 1e-9) -> bool:
    """True when ``x`` satisfies every row and bound of ``problem`` to ``tol``."""
    lhs = problem.A @ x
    scale = 1.0 + np.abs(problem.b)
    for s, v, r, sc in zip(problem.senses, lhs, problem.b, scale):
        if s == "<=" and v > r + tol * sc:
            return False
        if s == ">=" and v < r - tol * sc:
            return False
        if s == "=" and abs(v - r) > tol * sc:
            return False
    for xi, (lo, hi) in zip(x, problem.bounds):
        if xi < lo - tol * (1 + abs(lo)) or xi > hi + tol * (1 + abs(hi)):
            return False
    return True

"""KL divergences: Monte-Carlo symmetric KL from log-densities, and the Gaussian closed form."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError
from ..numerics.rng import RngStream
from .estimate import MetricEstimate


def _moments(model):
    return np.atleast_1d(np.asarray(model.mean, dtype=np.float64)), \
        np.atleast_2d(np.asarray(model.cov, dtype=np.float64))


def kl_gaussian_closed(mu, nu) -> float:
    """``KL(mu || nu)`` for two Gaussians exposing ``mean`` and ``cov``."""
    m0, S0 = _moments(mu)
    m1, S1 = _moments(nu)
    if m0.size != m1.size:
        raise UsageError("Gaussians must share a dimension")
    k = m0.size
    L1 = np.linalg.cholesky(S1)
    L0 = np.linalg.cholesky(S0)
    M = np.linalg.solve(L1, L0)
    diff = np.linalg.solve(L1, m1 - m0)
    logdet = 2.0 * (np.log(np.diag(L1)).sum() - np.log(np.diag(L0)).sum())
    return float(0.5 * (np.sum(M * M) + diff @ diff - k + logdet))


def symmetric_kl_closed(mu, nu) -> float:
    return kl_gaussian_closed(mu, nu) + kl_gaussian_closed(nu, mu)


def symmetric_kl(mu, nu, n: int, rng: RngStream) -> MetricEstimate:
    """``E_mu log(rho_mu/rho_nu) - E_nu log(rho_mu/rho_nu)`` by Monte Carlo.

    The two expectations use independent draws; the standard error combines
    their sample variances.
    """
    if n < 2:
        raise UsageError("need at least two Monte-Carlo draws")
    xm = mu.sample(n, rng.substream(0)).points
    xn = nu.sample(n, rng.substream(1)).points
    rm = mu.log_density(xm) - nu.log_density(xm)
    rn = mu.log_density(xn) - nu.log_density(xn)
    value = rm.mean() - rn.mean()
    se = np.sqrt(rm.var(ddof=1) / n + rn.var(ddof=1) / n)
    return MetricEstimate(value, "symkl", "monte_carlo", std_error=float(se), extra={"n": n})

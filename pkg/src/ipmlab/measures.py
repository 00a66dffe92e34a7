"""Distributions with exact log-densities, empirical measures and benchmarks.

The 2-d generator is ``x = [[1, 0], [l, 1]] diag(e^s1, e^s2) z + b`` with
``z ~ N(0, I)``; its parameter vector is laid out as ``(l, s1, s2, b1, b2)``.
The mixture generator stacks eight such blocks (40 parameters) with fixed
equal weights.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import DegenerateDataError, UsageError
from .numerics.rng import RngStream

LOG_2PI = math.log(2.0 * math.pi)

# E.2 benchmark constants
MIXTURE_COMPONENTS = 8
MIXTURE_RADIUS = math.sqrt(2.0)
MIXTURE_STD = 0.01414
TRAIN_SIZE = 100_000
TEST_SIZE = 1000


@dataclass
class EmpiricalMeasure:
    """Weighted point cloud; weights default to uniform ``1/n``."""

    points: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise UsageError("an empirical measure needs at least one point")
        self.points = pts
        if self.weights is None:
            self.weights = np.full(pts.shape[0], 1.0 / pts.shape[0])
        else:
            w = np.asarray(self.weights, dtype=np.float64).ravel()
            if w.size != pts.shape[0] or np.any(w < 0) or w.sum() <= 0:
                raise UsageError("weights must be nonnegative, one per point")
            self.weights = w / w.sum()

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def mean(self, values: np.ndarray) -> float:
        return float(self.weights @ values)

    def shifted(self, h) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.points + np.asarray(h, dtype=np.float64), self.weights.copy())

    def subset(self, n: int) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.points[:n])

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct support points and their merged weights."""
        uniq, inverse = np.unique(self.points, axis=0, return_inverse=True)
        w = np.zeros(uniq.shape[0])
        np.add.at(w, inverse.ravel(), self.weights)
        return uniq, w


def delta(*point) -> EmpiricalMeasure:
    """Point mass at ``point``."""
    return EmpiricalMeasure(np.array([point], dtype=np.float64))


# --------------------------------------------------------------------------- #
# Gaussians


@dataclass(frozen=True)
class MultivariateNormal:
    """Plain ``N(mean, cov)`` in any dimension (used for oracles and 1-d cases)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        if cov.shape != (mean.size, mean.size):
            raise UsageError("covariance shape must match the mean")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def _chol(self):
        try:
            return np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError as exc:
            raise DegenerateDataError("covariance is not positive definite") from exc

    def sample(self, n: int, rng: RngStream) -> EmpiricalMeasure:
        z = rng.normal((n, self.dim))
        return EmpiricalMeasure(z @ self._chol().T + self.mean)

    def log_density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1, self.dim)
        L = self._chol()
        u = np.linalg.solve(L, (x - self.mean).T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        return -0.5 * (self.dim * LOG_2PI + logdet + np.sum(u * u, axis=0))


@dataclass(frozen=True)
class GaussianModel:
    """Sheared, log-scaled 2-d Gaussian generator."""

    l: float = 0.0
    s: tuple[float, float] = (0.0, 0.0)
    b: tuple[float, float] = (0.0, 0.0)

    n_params = 5

    @classmethod
    def from_params(cls, p) -> "GaussianModel":
        p = np.asarray(p, dtype=np.float64)
        return cls(float(p[0]), (float(p[1]), float(p[2])), (float(p[3]), float(p[4])))

    @classmethod
    def from_moments(cls, mean, cov) -> "GaussianModel":
        """Recover ``(l, s, b)`` from the lower Cholesky factor of ``cov``."""
        cov = np.asarray(cov, dtype=np.float64)
        try:
            L = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise DegenerateDataError("sample covariance is singular") from exc
        a, c, d = L[0, 0], L[1, 0], L[1, 1]
        if not (a > 0 and d > 0) or d / a < 1e-12:
            raise DegenerateDataError("sample covariance is singular")
        mean = np.asarray(mean, dtype=np.float64)
        return cls(float(c / a), (math.log(a), math.log(d)), (float(mean[0]), float(mean[1])))

    @property
    def params(self) -> np.ndarray:
        return np.array([self.l, self.s[0], self.s[1], self.b[0], self.b[1]])

    @property
    def dim(self) -> int:
        return 2

    @property
    def A(self) -> np.ndarray:
        e1, e2 = math.exp(self.s[0]), math.exp(self.s[1])
        return np.array([[e1, 0.0], [self.l * e1, e2]])

    @property
    def mean(self) -> np.ndarray:
        return np.array(self.b, dtype=np.float64)

    @property
    def cov(self) -> np.ndarray:
        A = self.A
        return A @ A.T

    def log_det_cov(self) -> float:
        return 2.0 * (self.s[0] + self.s[1])

    def push(self, z: np.ndarray) -> np.ndarray:
        return z @ self.A.T + self.mean

    def sample(self, n: int, rng: RngStream) -> EmpiricalMeasure:
        return EmpiricalMeasure(self.push(rng.normal((n, 2))))

    def _whiten(self, x):
        x = np.asarray(x, dtype=np.float64).reshape(-1, 2)
        d1 = x[:, 0] - self.b[0]
        d2 = x[:, 1] - self.b[1]
        u1 = math.exp(-self.s[0]) * d1
        u2 = math.exp(-self.s[1]) * (d2 - self.l * d1)
        return d1, u1, u2

    def log_density(self, x) -> np.ndarray:
        _, u1, u2 = self._whiten(x)
        return -LOG_2PI - self.s[0] - self.s[1] - 0.5 * (u1 * u1 + u2 * u2)

    def grad_log_density(self, x) -> np.ndarray:
        """Per-point gradient of ``log p(x)`` wrt ``(l, s1, s2, b1, b2)``; shape (n, 5)."""
        d1, u1, u2 = self._whiten(x)
        e1, e2 = math.exp(-self.s[0]), math.exp(-self.s[1])
        g = np.empty((u1.size, 5))
        g[:, 0] = u2 * e2 * d1
        g[:, 1] = u1 * u1 - 1.0
        g[:, 2] = u2 * u2 - 1.0
        g[:, 3] = u1 * e1 - u2 * e2 * self.l
        g[:, 4] = u2 * e2
        return g

    def pathwise_grad(self, z: np.ndarray, gx: np.ndarray) -> np.ndarray:
        """``sum_i gx_i . d push(z_i) / d params`` for upstream gradients ``gx``."""
        z = np.asarray(z).reshape(-1, 2)
        gx = np.asarray(gx).reshape(-1, 2)
        e1, e2 = math.exp(self.s[0]), math.exp(self.s[1])
        z1, z2 = z[:, 0], z[:, 1]
        g1, g2 = gx[:, 0], gx[:, 1]
        return np.array([
            np.sum(g2 * e1 * z1),
            np.sum(g1 * e1 * z1 + g2 * self.l * e1 * z1),
            np.sum(g2 * e2 * z2),
            np.sum(g1),
            np.sum(g2),
        ])


def gaussian_sample(model: GaussianModel, n: int, rng: RngStream) -> EmpiricalMeasure:
    if n < 1:
        raise UsageError("n must be at least 1")
    return model.sample(n, rng)


def gaussian_log_density(model: GaussianModel, x) -> np.ndarray | float:
    out = model.log_density(x)
    return float(out[0]) if np.ndim(x) == 1 else out


def gaussian_fit_mle(samples: EmpiricalMeasure) -> GaussianModel:
    """Closed-form maximum-likelihood fit (weighted mean and covariance)."""
    if samples.n < 3:
        raise DegenerateDataError("MLE needs at least 3 samples")
    w = samples.weights
    mean = w @ samples.points
    centered = samples.points - mean
    cov = (centered * w[:, None]).T @ centered
    return GaussianModel.from_moments(mean, cov)


# --------------------------------------------------------------------------- #
# Mixture


@dataclass(frozen=True)
class MixtureModel:
    """Equal-weight mixture of :class:`GaussianModel` components."""

    components: tuple[GaussianModel, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise UsageError("a mixture needs at least one component")

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.k, 1.0 / self.k)

    @property
    def n_params(self) -> int:
        return 5 * self.k

    @property
    def dim(self) -> int:
        return 2

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([c.params for c in self.components])

    @classmethod
    def from_params(cls, p) -> "MixtureModel":
        p = np.asarray(p, dtype=np.float64).reshape(-1, 5)
        return cls(tuple(GaussianModel.from_params(row) for row in p))

    def sample_latent(self, n: int, rng: RngStream):
        k = rng.integers(self.k, size=n)
        z = rng.normal((n, 2))
        return k, z

    def push(self, k: np.ndarray, z: np.ndarray) -> np.ndarray:
        x = np.empty_like(z)
        for j, comp in enumerate(self.components):
            idx = k == j
            if np.any(idx):
                x[idx] = comp.push(z[idx])
        return x

    def sample(self, n: int, rng: RngStream) -> EmpiricalMeasure:
        k, z = self.sample_latent(n, rng)
        return EmpiricalMeasure(self.push(k, z))

    def component_log_densities(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64).reshape(-1, 2)
        return np.stack([c.log_density(x) for c in self.components], axis=1)

    def log_density(self, x) -> np.ndarray:
        return logsumexp(self.component_log_densities(x), axis=1) - math.log(self.k)

    def grad_log_density(self, x) -> np.ndarray:
        """Per-point gradient wrt all ``5k`` parameters, component-major."""
        lc = self.component_log_densities(x)
        resp = np.exp(lc - logsumexp(lc, axis=1, keepdims=True))
        grads = [resp[:, [j]] * c.grad_log_density(x) for j, c in enumerate(self.components)]
        return np.concatenate(grads, axis=1)

    def pathwise_grad(self, k: np.ndarray, z: np.ndarray, gx: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n_params)
        for j, comp in enumerate(self.components):
            idx = k == j
            if np.any(idx):
                out[5 * j:5 * j + 5] = comp.pathwise_grad(z[idx], gx[idx])
        return out


def mixture_sample(model: MixtureModel, n: int, rng: RngStream) -> EmpiricalMeasure:
    if n < 1:
        raise UsageError("n must be at least 1")
    return model.sample(n, rng)


def mixture_log_density(model: MixtureModel, x) -> np.ndarray | float:
    out = model.log_density(x)
    return float(out[0]) if np.ndim(x) == 1 else out


def model_from_params(template, params):
    """Rebuild a model of the same type as ``template`` from a flat vector."""
    return type(template).from_params(params)


# --------------------------------------------------------------------------- #
# Benchmarks


def e1_truth() -> GaussianModel:
    cov = np.array([[17.0, 15.0], [15.0, 17.0]]) / 128.0
    return GaussianModel.from_moments([0.5, -0.5], cov)


def e2_truth() -> MixtureModel:
    log_std = math.log(MIXTURE_STD)
    comps = []
    for k in range(MIXTURE_COMPONENTS):
        angle = 2.0 * math.pi * k / MIXTURE_COMPONENTS
        center = (MIXTURE_RADIUS * math.cos(angle), MIXTURE_RADIUS * math.sin(angle))
        comps.append(GaussianModel(0.0, (log_std, log_std), center))
    return MixtureModel(tuple(comps))


@dataclass
class DatasetSplit:
    train: EmpiricalMeasure
    test: EmpiricalMeasure
    truth: GaussianModel | MixtureModel
    name: str = ""
    seed: int = 0
    meta: dict = field(default_factory=dict)


BENCHMARKS = {"gaussian-e1": e1_truth, "mixture-e2": e2_truth}
_ALIASES = {"e1": "gaussian-e1", "e2": "mixture-e2"}


def make_benchmark(name: str, seed: int = 0, train_size: int = TRAIN_SIZE,
                   test_size: int = TEST_SIZE) -> DatasetSplit:
    """Build a benchmark; train and test use streams 1 and 2 of ``seed``."""
    key = _ALIASES.get(name, name)
    if key not in BENCHMARKS:
        raise UsageError(f"unknown benchmark {name!r}; choose from {sorted(BENCHMARKS)}")
    truth = BENCHMARKS[key]()
    train = truth.sample(train_size, RngStream(seed, 1))
    test = truth.sample(test_size, RngStream(seed, 2))
    return DatasetSplit(train, test, truth, key, seed)


# --------------------------------------------------------------------------- #
# CSV sample files


def read_samples_csv(path) -> EmpiricalMeasure:
    """Read one point per row; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                if i == 0 and not rows:
                    continue
                raise UsageError(f"{path}: non-numeric value in row {i + 1}")
    if not rows:
        raise UsageError(f"{path}: no sample rows")
    if len({len(r) for r in rows}) != 1:
        raise UsageError(f"{path}: ragged rows")
    return EmpiricalMeasure(np.array(rows))


def write_samples_csv(path, samples, header: bool = True) -> Path:
    pts = samples.points if isinstance(samples, EmpiricalMeasure) else np.atleast_2d(samples)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow([f"x{i + 1}" for i in range(pts.shape[1])])
        for row in pts:
            writer.writerow([repr(float(v)) for v in row])
    return path

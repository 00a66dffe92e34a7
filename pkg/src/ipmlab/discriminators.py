"""Parametric discriminator families.

A family is an immutable descriptor; parameters travel as flat float64
vectors whose layout the family knows (``unflatten``/``flatten``).  Each
family evaluates batches, returns exact parameter gradients of weighted sums
``sum_i c_i f(x_i)``, exact input gradients, projects onto its parameter
domain and reports the ``(Delta, L, p)`` constants used by the bounds.

ReLU subgradient at 0 is taken as 0 everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UsageError
from .numerics.rng import RngStream

_METADATA_SEED = 0xD15C


@dataclass(frozen=True)
class FamilyMetadata:
    delta: float
    lipschitz: float
    n_params: int
    delta_empirical: bool = False
    lipschitz_empirical: bool = False

    def as_tuple(self):
        return self.delta, self.lipschitz, self.n_params


def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([X, np.ones((X.shape[0], 1))])


def _as_batch(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, dim) if dim > 1 or X.size != 1 else X.reshape(1, 1)
    if X.shape[1] != dim:
        raise UsageError(f"expected inputs of dimension {dim}, got {X.shape[1]}")
    return X


def project_l1_ball(w: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Euclidean projection onto the l1 ball (sort-based)."""
    if np.abs(w).sum() <= radius:
        return w.copy()
    u = np.sort(np.abs(w))[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = np.nonzero(u * k > css - radius)[0][-1]
    tau = (css[rho] - radius) / (rho + 1.0)
    return np.sign(w) * np.maximum(np.abs(w) - tau, 0.0)


def _normalize_rows(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    norms = np.linalg.norm(V, axis=1)
    zero = norms == 0.0
    V[zero] = 0.0
    V[zero, -1] = 1.0  # canonical unit vector for the zero row
    norms[zero] = 1.0
    return V / norms[:, None]


class DiscriminatorFamily:
    """Base class; subclasses define the layout and the forward/backward maps."""

    kind = "base"
    domain = "none"  # "box" | "sphere" | "spectral" | "none"

    def __init__(self, dim: int, input_radius: float = 1.0):
        if dim < 1:
            raise ConfigurationError("input dimension must be >= 1")
        self.dim = int(dim)
        self.input_radius = float(input_radius)

    # ----- layout -------------------------------------------------------- #
    @property
    def layout(self) -> list[tuple[str, tuple[int, ...]]]:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return int(sum(int(np.prod(shape)) for _, shape in self.layout))

    def unflatten(self, theta) -> dict[str, np.ndarray]:
        theta = np.asarray(theta, dtype=np.float64).ravel()
        if theta.size != self.n_params:
            raise UsageError(f"{self.kind}: expected {self.n_params} parameters, got {theta.size}")
        out, k = {}, 0
        for name, shape in self.layout:
            size = int(np.prod(shape))
            out[name] = theta[k:k + size].reshape(shape)
            k += size
        return out

    def flatten(self, parts: dict[str, np.ndarray]) -> np.ndarray:
        if not self.layout:
            return np.zeros(0)
        return np.concatenate([np.asarray(parts[name], dtype=np.float64).ravel()
                               for name, _ in self.layout])

    # ----- function interface ------------------------------------------- #
    def value_and_grad(self, theta, X, coeffs):
        """Values ``f(x_i)`` and the gradient of ``sum_i c_i f(x_i)`` wrt theta."""
        raise NotImplementedError

    def eval_batch(self, theta, X) -> np.ndarray:
        X = _as_batch(X, self.dim)
        return self.value_and_grad(theta, X, None)[0]

    def eval_many(self, thetas, X) -> np.ndarray:
        """Rows ``f_{theta_k}(X)`` for a stack of parameter vectors."""
        X = _as_batch(X, self.dim)
        return np.stack([self.value_and_grad(t, X, None)[0] for t in np.atleast_2d(thetas)])

    def grad_params(self, theta, X, coeffs) -> np.ndarray:
        X = _as_batch(X, self.dim)
        coeffs = np.asarray(coeffs, dtype=np.float64).ravel()
        return self.value_and_grad(theta, X, coeffs)[1]

    def grad_input(self, theta, X) -> np.ndarray:
        """Per-point input gradients; a single point gives a single vector."""
        single = np.ndim(X) == 1
        out = self._grad_input(theta, _as_batch(X, self.dim))
        return out[0] if single else out

    def _grad_input(self, theta, X) -> np.ndarray:
        raise NotImplementedError

    # ----- domain --------------------------------------------------------- #
    def project(self, theta) -> np.ndarray:
        return np.asarray(theta, dtype=np.float64).copy()

    def random_init(self, rng: RngStream) -> np.ndarray:
        raise NotImplementedError

    def is_interior(self, theta, h: float) -> bool:
        return True

    def in_domain(self, theta, tol: float = 1e-12) -> bool:
        return True

    # ----- constants ------------------------------------------------------ #
    def metadata(self) -> FamilyMetadata:
        raise NotImplementedError

    def input_lipschitz(self) -> float | None:
        """Known bound on the input-Lipschitz constant of every member, if any."""
        return None

    def empirical_sup(self, n_theta: int = 200, n_x: int = 500, seed: int = _METADATA_SEED) -> float:
        """Random-search estimate of ``sup |f|`` over the domain and input ball."""
        rng = RngStream(seed, 1)
        X = rng.unit_ball(n_x, self.dim) * self.input_radius
        best = 0.0
        for _ in range(n_theta):
            theta = self.random_init(rng)
            best = max(best, float(np.max(np.abs(self.eval_batch(theta, X)))))
        return best

    def empirical_lipschitz(self, n_pairs: int = 200, n_x: int = 500,
                            seed: int = _METADATA_SEED) -> float:
        rng = RngStream(seed, 2)
        X = rng.unit_ball(n_x, self.dim) * self.input_radius
        best = 0.0
        for _ in range(n_pairs):
            t1 = self.random_init(rng)
            t2 = self.project(t1 + 1e-3 * rng.normal(t1.shape))
            dist = float(np.linalg.norm(t1 - t2))
            if dist == 0.0:
                continue
            diff = np.max(np.abs(self.eval_batch(t1, X) - self.eval_batch(t2, X)))
            best = max(best, float(diff) / dist)
        return best

    # ----- low-dimensional chart for exhaustive search -------------------- #
    def chart(self):
        """``(bounds, to_theta)`` when the domain has at most 2 degrees of freedom."""
        raise UsageError(f"{self.kind} has more than 2 parameters; no exhaustive grid")

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "input_radius": self.input_radius}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.describe().items() if k != "kind")
        return f"{type(self).__name__}({args})"


# --------------------------------------------------------------------------- #


class ConstantFamily(DiscriminatorFamily):
    """The single function ``x -> value``; no parameters."""

    kind = "constant"

    def __init__(self, dim: int = 1, value: float = 1.0, input_radius: float = 1.0):
        super().__init__(dim, input_radius)
        self.value = float(value)

    @property
    def layout(self):
        return []

    def value_and_grad(self, theta, X, coeffs):
        return np.full(X.shape[0], self.value), np.zeros(0)

    def _grad_input(self, theta, X):
        return np.zeros_like(X)

    def random_init(self, rng):
        return np.zeros(0)

    def metadata(self):
        return FamilyMetadata(abs(self.value), 0.0, 0)

    def input_lipschitz(self):
        return 0.0

    def describe(self):
        return {**super().describe(), "value": self.value}


class BoxFamily(DiscriminatorFamily):
    """Families whose parameters live in the box ``[-clip, clip]^p``."""

    domain = "box"

    def __init__(self, dim: int, clip: float, input_radius: float = 1.0):
        super().__init__(dim, input_radius)
        if not clip > 0:
            raise ConfigurationError("clip radius must be positive")
        self.clip = float(clip)

    def project(self, theta):
        return np.clip(np.asarray(theta, dtype=np.float64), -self.clip, self.clip)

    def random_init(self, rng):
        return rng.uniform(self.n_params, -self.clip, self.clip)

    def is_interior(self, theta, h):
        return bool(np.all(np.abs(theta) < self.clip - h))

    def in_domain(self, theta, tol=0.0):
        return bool(np.all(np.abs(theta) <= self.clip + tol))

    def chart(self):
        if self.n_params > 2:
            return super().chart()
        bounds = [(-self.clip, self.clip)] * self.n_params
        return bounds, lambda u: np.asarray(u, dtype=np.float64)

    def describe(self):
        return {**super().describe(), "clip": self.clip}


class QuadraticFamily(BoxFamily):
    """``x^T A x + b^T x`` (degree 2) or ``b^T x`` (degree 1), all entries clipped."""

    kind = "quadratic"

    def __init__(self, dim: int = 2, clip: float = 0.05, degree: int = 2, input_radius: float = 1.0):
        if degree not in (1, 2):
            raise ConfigurationError("quadratic family degree must be 1 or 2")
        self.degree = int(degree)
        super().__init__(dim, clip, input_radius)

    @property
    def layout(self):
        d = self.dim
        return ([("A", (d, d))] if self.degree == 2 else []) + [("b", (d,))]

    def value_and_grad(self, theta, X, coeffs):
        p = self.unflatten(theta)
        vals = X @ p["b"]
        if self.degree == 2:
            vals = vals + np.einsum("ni,ij,nj->n", X, p["A"], X)
        if coeffs is None:
            return vals, None
        parts = {"b": coeffs @ X}
        if self.degree == 2:
            parts["A"] = (X * coeffs[:, None]).T @ X
        return vals, self.flatten(parts)

    def features(self, X) -> np.ndarray:
        """Monomials matching the parameter layout, so ``f = features @ theta``."""
        X = _as_batch(X, self.dim)
        parts = [np.einsum("ni,nj->nij", X, X).reshape(X.shape[0], -1)] if self.degree == 2 else []
        return np.hstack(parts + [X])

    def eval_many(self, thetas, X):
        return np.atleast_2d(thetas) @ self.features(X).T

    def _grad_input(self, theta, X):
        p = self.unflatten(theta)
        g = np.broadcast_to(p["b"], X.shape).copy()
        if self.degree == 2:
            g += X @ (p["A"] + p["A"].T).T
        return g

    def metadata(self):
        r, d, c = self.input_radius, self.dim, self.clip
        # |x^T A x| <= ||A||_F r^2 <= c d r^2 ; |b^T x| <= c sqrt(d) r
        delta = c * (math.sqrt(d) * r + (d * r * r if self.degree == 2 else 0.0))
        # Cauchy-Schwarz against the feature vector (vec(x x^T), x)
        lip = math.sqrt(r ** 4 + r ** 2) if self.degree == 2 else r
        return FamilyMetadata(delta, lip, self.n_params)

    def input_lipschitz(self):
        c, d, r = self.clip, self.dim, self.input_radius
        return c * math.sqrt(d) + (2.0 * c * d * r if self.degree == 2 else 0.0)

    def describe(self):
        return {**super().describe(), "degree": self.degree}


def linear_family(dim: int = 1, clip: float = 1.0) -> QuadraticFamily:
    """``{x -> theta^T x : |theta_i| <= clip}``."""
    return QuadraticFamily(dim=dim, clip=clip, degree=1)


class SingleNeuronFamily(DiscriminatorFamily):
    """``max(v^T [x; 1], 0)`` with ``||v||_2 = 1``."""

    kind = "single_neuron"
    domain = "sphere"

    @property
    def layout(self):
        return [("v", (self.dim + 1,))]

    def value_and_grad(self, theta, X, coeffs):
        Xa = _augment(X)
        pre = Xa @ theta
        vals = np.maximum(pre, 0.0)
        if coeffs is None:
            return vals, None
        active = (pre > 0).astype(np.float64)
        return vals, (coeffs * active) @ Xa

    def eval_many(self, thetas, X):
        return np.maximum(np.atleast_2d(thetas) @ _augment(_as_batch(X, self.dim)).T, 0.0)

    def _grad_input(self, theta, X):
        pre = _augment(X) @ theta
        return (pre > 0)[:, None] * theta[None, :-1]

    def project(self, theta):
        return _normalize_rows(np.asarray(theta, dtype=np.float64).reshape(1, -1))[0]

    def random_init(self, rng):
        return rng.unit_sphere(1, self.dim + 1)[0]

    def in_domain(self, theta, tol=1e-12):
        return abs(np.linalg.norm(theta) - 1.0) <= tol

    def metadata(self):
        # ||[x; 1]||_2 <= sqrt(r^2 + 1) bounds both |f| and the parameter-Lipschitz constant
        bound = math.sqrt(self.input_radius ** 2 + 1.0)
        return FamilyMetadata(bound, bound, self.n_params)

    def input_lipschitz(self):
        return 1.0

    def chart(self):
        if self.dim != 1:
            return super().chart()
        return [(-math.pi, math.pi)], lambda u: np.array([math.cos(u[0]), math.sin(u[0])])


class ReluMixtureFamily(DiscriminatorFamily):
    """``sum_i w_i max(v_i^T [x; 1], 0)`` with ``||w||_1 <= 1`` and unit ``v_i``."""

    kind = "relu_mixture"
    domain = "sphere"

    def __init__(self, dim: int = 2, n_neurons: int = 8, input_radius: float = 1.0):
        super().__init__(dim, input_radius)
        self.n_neurons = int(n_neurons)

    @property
    def layout(self):
        return [("w", (self.n_neurons,)), ("V", (self.n_neurons, self.dim + 1))]

    def value_and_grad(self, theta, X, coeffs):
        p = self.unflatten(theta)
        Xa = _augment(X)
        pre = Xa @ p["V"].T
        H = np.maximum(pre, 0.0)
        vals = H @ p["w"]
        if coeffs is None:
            return vals, None
        gw = coeffs @ H
        gV = ((coeffs[:, None] * (pre > 0)) * p["w"][None, :]).T @ Xa
        return vals, self.flatten({"w": gw, "V": gV})

    def _grad_input(self, theta, X):
        p = self.unflatten(theta)
        pre = _augment(X) @ p["V"].T
        return ((pre > 0) * p["w"][None, :]) @ p["V"][:, :-1]

    def project(self, theta):
        p = self.unflatten(np.asarray(theta, dtype=np.float64).copy())
        return self.flatten({"w": project_l1_ball(p["w"]), "V": _normalize_rows(p["V"])})

    def random_init(self, rng):
        w = rng.uniform(self.n_neurons, -1.0, 1.0)
        V = rng.unit_sphere(self.n_neurons, self.dim + 1)
        return self.project(self.flatten({"w": w, "V": V}))

    def in_domain(self, theta, tol=1e-12):
        p = self.unflatten(theta)
        return (np.abs(p["w"]).sum() <= 1 + tol
                and np.allclose(np.linalg.norm(p["V"], axis=1), 1.0, atol=tol))

    def metadata(self):
        bound = math.sqrt(self.input_radius ** 2 + 1.0)
        return FamilyMetadata(bound, bound * math.sqrt(self.n_neurons + 1.0), self.n_params)

    def input_lipschitz(self):
        return 1.0

    def describe(self):
        return {**super().describe(), "n_neurons": self.n_neurons}


class ClippedMLP(BoxFamily):
    """ReLU MLP with hidden biases and a linear scalar output, every weight clipped."""

    kind = "clipped_mlp"

    def __init__(self, dim: int = 2, widths: Sequence[int] = (64, 64, 64, 64), clip: float = 0.05,
                 input_radius: float = 1.0, output_bias: bool = False):
        self.widths = tuple(int(w) for w in widths)
        if not self.widths or min(self.widths) < 1:
            raise ConfigurationError("clipped_mlp needs at least one hidden layer")
        self.output_bias = bool(output_bias)
        super().__init__(dim, clip, input_radius)

    @property
    def layout(self):
        out, fan_in = [], self.dim
        for k, w in enumerate(self.widths):
            out += [(f"W{k}", (w, fan_in)), (f"c{k}", (w,))]
            fan_in = w
        out.append(("w_out", (fan_in,)))
        if self.output_bias:
            out.append(("c_out", (1,)))
        return out

    def _forward(self, p, X):
        hs, zs = [X], []
        h = X
        for k in range(len(self.widths)):
            z = h @ p[f"W{k}"].T + p[f"c{k}"]
            zs.append(z)
            h = np.maximum(z, 0.0)
            hs.append(h)
        out = h @ p["w_out"]
        if self.output_bias:
            out = out + p["c_out"][0]
        return out, hs, zs

    def _backward(self, p, hs, zs, coeffs, want_input=False):
        grads = {"w_out": coeffs @ hs[-1]}
        if self.output_bias:
            grads["c_out"] = np.array([coeffs.sum()])
        dh = coeffs[:, None] * p["w_out"][None, :]
        for k in reversed(range(len(self.widths))):
            dz = dh * (zs[k] > 0)
            grads[f"W{k}"] = dz.T @ hs[k]
            grads[f"c{k}"] = dz.sum(axis=0)
            dh = dz @ p[f"W{k}"]
        return grads, dh

    def value_and_grad(self, theta, X, coeffs):
        p = self.unflatten(theta)
        vals, hs, zs = self._forward(p, X)
        if coeffs is None:
            return vals, None
        grads, _ = self._backward(p, hs, zs, coeffs)
        return vals, self.flatten(grads)

    def _grad_input(self, theta, X):
        p = self.unflatten(theta)
        _, hs, zs = self._forward(p, X)
        _, dx = self._backward(p, hs, zs, np.ones(X.shape[0]))
        return dx

    def metadata(self):
        # ||relu(W h + c)|| <= ||[W c]||_op ||[h; 1]|| and ||[W c]||_op <= clip * sqrt(rows * cols)
        c, h = self.clip, self.input_radius
        fan_in = self.dim
        for w in self.widths:
            h = c * math.sqrt(w * (fan_in + 1)) * math.sqrt(h * h + 1.0)
            fan_in = w
        if self.output_bias:
            delta = c * math.sqrt(fan_in + 1) * math.sqrt(h * h + 1.0)
        else:
            delta = c * math.sqrt(fan_in) * h
        return FamilyMetadata(delta, 1.1 * self.empirical_lipschitz(), self.n_params,
                              lipschitz_empirical=True)

    def describe(self):
        return {**super().describe(), "widths": list(self.widths), "output_bias": self.output_bias}


class SpectralMLP(DiscriminatorFamily):
    """Bias-free ReLU network ``A_L relu(... relu(A_1 x))`` with spectral-norm caps ``s_i``.

    ``project`` rescales each layer radially so that ``||A_i||_2 <= s_i``.
    """

    kind = "spectral_mlp"
    domain = "spectral"

    def __init__(self, dim: int = 2, widths: Sequence[int] = (16,), spectral_bounds=None,
                 input_radius: float = 1.0):
        super().__init__(dim, input_radius)
        self.widths = tuple(int(w) for w in widths)
        n_layers = len(self.widths) + 1
        if spectral_bounds is None:
            spectral_bounds = [1.0] * n_layers
        self.spectral_bounds = tuple(float(s) for s in spectral_bounds)
        if len(self.spectral_bounds) != n_layers or min(self.spectral_bounds) <= 0:
            raise ConfigurationError("one positive spectral bound per layer required")

    @property
    def layout(self):
        shapes, fan_in = [], self.dim
        for k, w in enumerate(self.widths):
            shapes.append((f"A{k}", (w, fan_in)))
            fan_in = w
        shapes.append((f"A{len(self.widths)}", (1, fan_in)))
        return shapes

    def layer_matrices(self, theta) -> list[np.ndarray]:
        p = self.unflatten(theta)
        return [p[name] for name, _ in self.layout]

    def _forward(self, mats, X):
        hs, zs, h = [X], [], X
        for A in mats[:-1]:
            z = h @ A.T
            zs.append(z)
            h = np.maximum(z, 0.0)
            hs.append(h)
        return (h @ mats[-1].T)[:, 0], hs, zs

    def _backward(self, mats, hs, zs, coeffs):
        grads = [None] * len(mats)
        grads[-1] = (coeffs @ hs[-1])[None, :]
        dh = coeffs[:, None] * mats[-1]
        for k in reversed(range(len(mats) - 1)):
            dz = dh * (zs[k] > 0)
            grads[k] = dz.T @ hs[k]
            dh = dz @ mats[k]
        return grads, dh

    def value_and_grad(self, theta, X, coeffs):
        mats = self.layer_matrices(theta)
        vals, hs, zs = self._forward(mats, X)
        if coeffs is None:
            return vals, None
        grads, _ = self._backward(mats, hs, zs, coeffs)
        return vals, np.concatenate([g.ravel() for g in grads])

    def _grad_input(self, theta, X):
        mats = self.layer_matrices(theta)
        _, hs, zs = self._forward(mats, X)
        return self._backward(mats, hs, zs, np.ones(X.shape[0]))[1]

    def project(self, theta):
        mats = self.layer_matrices(np.asarray(theta, dtype=np.float64))
        out = []
        for A, s in zip(mats, self.spectral_bounds):
            norm = np.linalg.norm(A, 2)
            out.append(A * (s / norm) if norm > s else A)
        return np.concatenate([A.ravel() for A in out])

    def random_init(self, rng):
        theta = rng.normal(self.n_params)
        mats = self.layer_matrices(theta)
        scaled = [A * (s / max(np.linalg.norm(A, 2), 1e-300)) for A, s in zip(mats, self.spectral_bounds)]
        return np.concatenate([A.ravel() for A in scaled])

    def in_domain(self, theta, tol=1e-12):
        mats = self.layer_matrices(theta)
        return all(np.linalg.norm(A, 2) <= s * (1 + tol) for A, s in zip(mats, self.spectral_bounds))

    def metadata(self):
        delta = self.input_radius * float(np.prod(self.spectral_bounds))
        return FamilyMetadata(delta, 1.1 * self.empirical_lipschitz(), self.n_params,
                              lipschitz_empirical=True)

    def input_lipschitz(self):
        return float(np.prod(self.spectral_bounds))

    def describe(self):
        return {**super().describe(), "widths": list(self.widths),
                "spectral_bounds": list(self.spectral_bounds)}


class FGanWrapped(DiscriminatorFamily):
    """``sigma(f0(x))`` for a core family ``f0`` and an output activation ``sigma``."""

    kind = "fgan_wrapped"

    def __init__(self, core: DiscriminatorFamily, pair):
        super().__init__(core.dim, core.input_radius)
        self.core = core
        self.pair = pair
        self.domain = core.domain

    @property
    def layout(self):
        return self.core.layout

    def value_and_grad(self, theta, X, coeffs):
        if coeffs is None:
            v0, _ = self.core.value_and_grad(theta, X, None)
            return self.pair.activation(v0), None
        v0 = self.core.eval_batch(theta, X)
        scaled = coeffs * self.pair.activation_grad(v0)
        _, g = self.core.value_and_grad(theta, X, scaled)
        return self.pair.activation(v0), g

    def eval_many(self, thetas, X):
        return self.pair.activation(self.core.eval_many(thetas, X))

    def _grad_input(self, theta, X):
        v0 = self.core.eval_batch(theta, X)
        return self.pair.activation_grad(v0)[:, None] * self.core.grad_input(theta, X)

    def project(self, theta):
        return self.core.project(theta)

    def random_init(self, rng):
        return self.core.random_init(rng)

    def is_interior(self, theta, h):
        return self.core.is_interior(theta, h)

    def in_domain(self, theta, tol=1e-12):
        return self.core.in_domain(theta, tol)

    def chart(self):
        return self.core.chart()

    def metadata(self):
        return FamilyMetadata(1.1 * self.empirical_sup(), 1.1 * self.empirical_lipschitz(),
                              self.n_params, True, True)

    def describe(self):
        return {"kind": self.kind, "core": self.core.describe(), "pair": self.pair.name}


def family_metadata(family: DiscriminatorFamily) -> tuple[float, float, int]:
    return family.metadata().as_tuple()


# --------------------------------------------------------------------------- #
# config round trip


def _parse_widths(value) -> tuple[int, ...]:
    if isinstance(value, str):
        return tuple(int(v) for v in value.replace("x", ",").split(",") if v.strip())
    return tuple(int(v) for v in value)


def family_from_config(cfg: dict) -> DiscriminatorFamily:
    """Build a family from a flat descriptor such as ``{"kind": "clipped_mlp", "widths": "64,64"}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    dim = int(cfg.pop("dim", 2))
    radius = float(cfg.pop("input_radius", 1.0))
    if kind == "constant":
        return ConstantFamily(dim, float(cfg.get("value", 1.0)), radius)
    if kind == "single_neuron":
        return SingleNeuronFamily(dim, radius)
    if kind == "relu_mixture":
        return ReluMixtureFamily(dim, int(cfg.get("n_neurons", 8)), radius)
    if kind == "quadratic":
        return QuadraticFamily(dim, float(cfg.get("clip", 0.05)), int(cfg.get("degree", 2)), radius)
    if kind == "clipped_mlp":
        return ClippedMLP(dim, _parse_widths(cfg.get("widths", (64, 64, 64, 64))),
                          float(cfg.get("clip", 0.05)), radius,
                          str(cfg.get("output_bias", False)).lower() in ("1", "true", "yes"))
    if kind == "spectral_mlp":
        bounds = cfg.get("spectral_bounds")
        if isinstance(bounds, str):
            bounds = [float(v) for v in bounds.split(",")]
        return SpectralMLP(dim, _parse_widths(cfg.get("widths", (16,))), bounds, radius)
    if kind == "fgan_wrapped":
        from .metrics.conjugates import get_pair

        core_cfg = cfg.get("core")
        if not isinstance(core_cfg, dict):
            raise ConfigurationError("fgan_wrapped needs a 'core' family descriptor")
        return FGanWrapped(family_from_config(core_cfg), get_pair(cfg.get("pair", "pearson")))
    raise ConfigurationError(f"unknown discriminator kind {kind!r}")

"""Reproducible, splittable random streams.

Streams are keyed Philox (counter-based) generators: the 128-bit key is
``(seed, stream_id)`` so any number of independent streams can be assigned
up front, e.g. one per restart or per Rademacher trial.  Normal variates use
Box-Muller on top of the uniform stream so the algorithm, not a library
default, defines them.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finalizer (used to derive child stream ids)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class RngStream:
    """A single-owner random stream identified by ``(seed, stream_id)``."""

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def substream(self, index: int) -> "RngStream":
        """Independent child stream; depends only on (seed, stream_id, index)."""
        child = splitmix64(self.stream_id ^ splitmix64(int(index) + 1))
        return RngStream(self.seed, child)

    def raw_uint64(self, size=None):
        return self._gen.integers(0, np.iinfo(np.uint64).max, size=size,
                                  dtype=np.uint64, endpoint=True)

    def uniform(self, size=None, low: float = 0.0, high: float = 1.0):
        u = self._gen.random(size)
        if low == 0.0 and high == 1.0:
            return u
        return low + (high - low) * u

    def normal(self, size=None):
        """Standard normal variates via Box-Muller."""
        if size is None:
            return float(self.normal(1)[0])
        shape = (size,) if np.isscalar(size) else tuple(size)
        n = int(np.prod(shape))
        pairs = (n + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # (0, 1], keeps log finite
        u2 = self._gen.random(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n].reshape(shape)

    def integers(self, high: int, size=None):
        """Uniform integers in ``[0, high)``."""
        return self._gen.integers(0, high, size=size)

    def rademacher(self, size):
        """Independent +-1 signs with probability 1/2 each."""
        return np.where(self._gen.random(size) < 0.5, -1.0, 1.0)

    def unit_sphere(self, n: int, dim: int):
        """``n`` points uniform on the unit sphere in R^dim."""
        z = self.normal((n, dim))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return z / norms

    def unit_ball(self, n: int, dim: int):
        """``n`` points uniform in the closed unit ball of R^dim."""
        directions = self.unit_sphere(n, dim)
        radii = self._gen.random(n) ** (1.0 / dim)
        return directions * radii[:, None]


def rng_stream(seed: int, stream_id: int = 0) -> RngStream:
    return RngStream(seed, stream_id)

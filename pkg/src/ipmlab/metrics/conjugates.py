"""Conjugate pairs for variational f-divergences.

A pair bundles the conjugate ``psi*`` of a shifted generator ``psi(t) =
phi(t + 1)`` (so ``psi(0) = 0``), an output activation ``sigma`` whose range
lies in ``dom psi*``, and the point ``b0`` with ``psi*(b0) = 0``.  Since
``psi* >= 0`` the penalty ``E_Q psi*(f)`` is nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import ConfigurationError

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ConjugatePair:
    name: str
    psi_star: Callable[[np.ndarray], np.ndarray]
    psi_star_grad: Callable[[np.ndarray], np.ndarray]
    activation: Callable[[np.ndarray], np.ndarray]
    activation_grad: Callable[[np.ndarray], np.ndarray]
    b0: float
    domain_sup: float = math.inf  # dom psi* = (-inf, domain_sup)
    activation_sup: float = math.inf  # sigma maps into (-inf, activation_sup)

    def validate(self) -> None:
        if self.activation_sup > self.domain_sup:
            raise ConfigurationError(
                f"{self.name}: activation range (-inf, {self.activation_sup}) is not inside "
                f"dom psi* = (-inf, {self.domain_sup})")
        if not self.b0 < self.domain_sup or abs(float(self.psi_star(np.array([self.b0]))[0])) > 1e-12:
            raise ConfigurationError(f"{self.name}: psi*(b0) must vanish inside the domain")


def _identity(v):
    return np.asarray(v, dtype=np.float64)


def _one(v):
    return np.ones_like(np.asarray(v, dtype=np.float64))


def _js_psi_star(y):
    y = np.asarray(y, dtype=np.float64)
    # log1p/expm1 keep psi* >= 0 near b0 = 0
    return -y - np.log1p(-np.expm1(y))


def _js_psi_star_grad(y):
    y = np.asarray(y, dtype=np.float64)
    return -1.0 + np.exp(y) / (1.0 - np.expm1(y))


def _js_activation(v):
    return LOG2 - np.logaddexp(0.0, -np.asarray(v, dtype=np.float64))


def _js_activation_grad(v):
    v = np.asarray(v, dtype=np.float64)
    return np.exp(-np.logaddexp(0.0, v))  # 1 / (1 + e^v)


PEARSON = ConjugatePair("pearson", lambda y: np.asarray(y, dtype=np.float64) ** 2 / 4.0,
                        lambda y: np.asarray(y, dtype=np.float64) / 2.0,
                        _identity, _one, b0=0.0)

JENSEN_SHANNON = ConjugatePair("js", _js_psi_star, _js_psi_star_grad,
                               _js_activation, _js_activation_grad, b0=0.0,
                               domain_sup=LOG2, activation_sup=LOG2)

PAIRS = {"pearson": PEARSON, "js": JENSEN_SHANNON}


def get_pair(name: str) -> ConjugatePair:
    try:
        return PAIRS[name]
    except KeyError:
        raise ConfigurationError(f"unknown conjugate pair {name!r}; known: {sorted(PAIRS)}") from None

"""Closed-form generalization bounds and the compatibility coefficient.

Every calculator returns a :class:`BoundReport` whose ``total`` is the sum of
its itemized terms; :func:`recompute_total` re-derives the total from the
echoed inputs along a separate code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexity import spectral_rademacher_bound
from .errors import DomainError, IncompatibilityError, NotInSpanError
from .span import DecompositionResult, Dictionary, f_variation_norm, monomial_dictionary

TERMS = ("rademacher", "concentration", "modeling", "epsilon")


@dataclass
class BoundReport:
    formula_tag: str
    inputs: dict
    terms: dict
    total: float
    confidence: float
    quantitative: bool = True

    def to_dict(self) -> dict:
        return {"formula_tag": self.formula_tag, "inputs": dict(self.inputs),
                "terms": {k: float(self.terms[k]) for k in TERMS},
                "total": float(self.total), "confidence": float(self.confidence)}


def _report(tag, inputs, rademacher, concentration, modeling, epsilon, confidence):
    terms = {"rademacher": float(rademacher), "concentration": float(concentration),
             "modeling": float(modeling), "epsilon": float(epsilon)}
    total = terms["modeling"] + terms["rademacher"] + terms["concentration"] + terms["epsilon"]
    return BoundReport(tag, inputs, terms, total, confidence)


def _check_common(m, delta, eps, modeling_error=0.0):
    if not m >= 1:
        raise DomainError("sample size m must be >= 1")
    if not 0.0 < delta < 1.0:
        raise DomainError("confidence parameter delta must lie in (0, 1)")
    if eps < 0:
        raise DomainError("optimization error epsilon must be >= 0")
    if modeling_error < 0:
        raise DomainError("modeling error must be >= 0")


def bound_theorem41(R_m: float, Delta: float, delta: float, m: float, eps: float = 0.0,
                    modeling_error: float = 0.0) -> BoundReport:
    """``modeling + 2 R_m + 2 Delta sqrt(2 log(1/delta) / m) + eps``."""
    _check_common(m, delta, eps, modeling_error)
    if not Delta > 0:
        raise DomainError("sup-norm bound Delta must be positive")
    if R_m < 0:
        raise DomainError("Rademacher complexity must be >= 0")
    conc = 2.0 * Delta * math.sqrt(2.0 * math.log(1.0 / delta) / m)
    return _report("theorem41", {"R_m": R_m, "Delta": Delta, "delta": delta, "m": m,
                                 "eps": eps, "modeling_error": modeling_error},
                   2.0 * R_m, conc, modeling_error, eps, 1.0 - delta)


def relu_constant(delta: float) -> float:
    return 4.0 * math.sqrt(2.0) + 4.0 * math.sqrt(math.log(1.0 / delta))


def bound_relu(m: float, delta: float, eps: float = 0.0, modeling_error: float = 0.0) -> BoundReport:
    """Single ReLU neuron: ``modeling + C / sqrt(m) + eps``, ``C = 4 sqrt 2 + 4 sqrt(log 1/delta)``."""
    _check_common(m, delta, eps, modeling_error)
    C = relu_constant(delta)
    sm = math.sqrt(m)
    return _report("relu", {"m": m, "delta": delta, "eps": eps, "modeling_error": modeling_error,
                            "C": C},
                   4.0 * math.sqrt(2.0) / sm, 4.0 * math.sqrt(math.log(1.0 / delta)) / sm,
                   modeling_error, eps, 1.0 - delta)


def parametric_constant(p: float, L: float, Delta: float, delta: float) -> float:
    return 16.0 * math.sqrt(2.0 * math.pi) * p * L + 2.0 * Delta * math.sqrt(2.0 * math.log(1.0 / delta))


def bound_parametric(p: int, L: float, Delta: float, delta: float, m: float, eps: float = 0.0,
                     modeling_error: float = 0.0) -> BoundReport:
    """Parameter-Lipschitz family: ``C = 16 sqrt(2 pi) p L + 2 Delta sqrt(2 log 1/delta)``."""
    _check_common(m, delta, eps, modeling_error)
    if p < 1 or not L > 0 or not Delta > 0:
        raise DomainError("need p >= 1, L > 0 and Delta > 0")
    C = parametric_constant(p, L, Delta, delta)
    sm = math.sqrt(m)
    return _report("parametric", {"p": p, "L": L, "Delta": Delta, "delta": delta, "m": m, "eps": eps,
                                  "modeling_error": modeling_error, "C": C},
                   16.0 * math.sqrt(2.0 * math.pi) * p * L / sm,
                   2.0 * Delta * math.sqrt(2.0 * math.log(1.0 / delta)) / sm,
                   modeling_error, eps, 1.0 - delta)


def mmd_constant(C_k: float, delta: float) -> float:
    return 2.0 * (2.0 + math.sqrt(2.0 * math.log(1.0 / delta))) * math.sqrt(C_k)


def bound_mmd(C_k: float, delta: float, m: float, eps: float = 0.0,
              modeling_error: float = 0.0) -> BoundReport:
    """RKHS unit ball with ``k(x, x) <= C_k``: ``C = 2 (2 + sqrt(2 log 1/delta)) sqrt(C_k)``."""
    _check_common(m, delta, eps, modeling_error)
    if not C_k > 0:
        raise DomainError("kernel bound C_k must be positive")
    C = mmd_constant(C_k, delta)
    sm = math.sqrt(m)
    return _report("mmd", {"C_k": C_k, "delta": delta, "m": m, "eps": eps,
                           "modeling_error": modeling_error, "C": C},
                   4.0 * math.sqrt(C_k) / sm,
                   2.0 * math.sqrt(2.0 * math.log(1.0 / delta)) * math.sqrt(C_k) / sm,
                   modeling_error, eps, 1.0 - delta)


def bound_kl(Lambda: float, R_m: float, Delta: float, delta: float, m: float, eps: float = 0.0,
             inf_kl: float = 0.0) -> BoundReport:
    """``Lambda (2 R_m + 2 Delta sqrt(2 log(1/delta)/m) + Delta sqrt(inf_kl) + eps)``.

    ``inf_kl`` is the smallest KL from the truth to the generator class; the
    square root is taken here.  Each itemized term already carries the factor Lambda.
    """
    _check_common(m, delta, eps)
    for name, v in (("Lambda", Lambda), ("R_m", R_m), ("Delta", Delta), ("inf_kl", inf_kl)):
        if v < 0:
            raise DomainError(f"{name} must be >= 0")
    conc = 2.0 * Delta * math.sqrt(2.0 * math.log(1.0 / delta) / m)
    return _report("kl", {"Lambda": Lambda, "R_m": R_m, "Delta": Delta, "delta": delta, "m": m,
                          "eps": eps, "inf_kl": inf_kl},
                   Lambda * 2.0 * R_m, Lambda * conc, Lambda * Delta * math.sqrt(inf_kl),
                   Lambda * eps, 1.0 - delta)


def bound_spectral(x_frobenius: float, R: float, Delta: float, m: float, delta: float,
                   eps: float = 0.0, modeling_error: float = 0.0) -> BoundReport:
    """``48 ||X||_F R/m (1 + log(m/(3||X||_F R))) + 6 Delta sqrt(2 log(2/delta)/m)`` plus modeling and eps."""
    _check_common(m, delta, eps, modeling_error)
    if Delta < 0:
        raise DomainError("Delta must be >= 0")
    rad = 2.0 * spectral_rademacher_bound(x_frobenius, R, m)
    conc = 6.0 * Delta * math.sqrt(2.0 * math.log(2.0 / delta) / m)
    return _report("spectral", {"x_frobenius": x_frobenius, "R": R, "Delta": Delta, "m": m,
                                "delta": delta, "eps": eps, "modeling_error": modeling_error},
                   rad, conc, modeling_error, eps, 1.0 - delta)


def bound_fdiv(R_m: float, Delta: float, delta: float, m: float, eps: float = 0.0,
               modeling_error: float = 0.0) -> BoundReport:
    """Neural f-divergence bound: the same expression as :func:`bound_theorem41`, confidence ``1 - 2 delta``."""
    if not 0.0 < delta < 0.5:
        raise DomainError("f-divergence bound needs 0 < delta < 1/2")
    base = bound_theorem41(R_m, Delta, delta, m, eps, modeling_error)
    return BoundReport("fdiv", base.inputs, base.terms, base.total, 1.0 - 2.0 * delta)


def bound_bl_from_neural(neural_total: float, d: int, alpha: float = 1.0) -> float:
    """Rate skeleton ``neural_total^(1/(alpha + (d+1)/2))``, up to constants and log factors.

    Not a quantitative bound: the hidden constants are set to 1.
    """
    if neural_total < 0 or d < 1 or alpha < 1:
        raise DomainError("need neural_total >= 0, d >= 1 and alpha >= 1")
    return float(neural_total) ** (1.0 / (alpha + (d + 1) / 2.0))


FORMULAS = {
    "theorem41": bound_theorem41, "relu": bound_relu, "parametric": bound_parametric,
    "mmd": bound_mmd, "kl": bound_kl, "spectral": bound_spectral, "fdiv": bound_fdiv,
}


def recompute_total(report: BoundReport) -> float:
    """Independent evaluation of the tagged closed form from ``report.inputs``."""
    x = report.inputs
    tag = report.formula_tag
    if tag in ("theorem41", "fdiv"):
        return (x["modeling_error"] + 2 * x["R_m"]
                + 2 * x["Delta"] * np.sqrt(2 * np.log(1 / x["delta"]) / x["m"]) + x["eps"])
    if tag == "relu":
        C = 4 * np.sqrt(2) + 4 * np.sqrt(np.log(1 / x["delta"]))
        return x["modeling_error"] + C / np.sqrt(x["m"]) + x["eps"]
    if tag == "parametric":
        C = 16 * np.sqrt(2 * np.pi) * x["p"] * x["L"] + 2 * x["Delta"] * np.sqrt(2 * np.log(1 / x["delta"]))
        return x["modeling_error"] + C / np.sqrt(x["m"]) + x["eps"]
    if tag == "mmd":
        C = 2 * (2 + np.sqrt(2 * np.log(1 / x["delta"]))) * np.sqrt(x["C_k"])
        return x["modeling_error"] + C / np.sqrt(x["m"]) + x["eps"]
    if tag == "kl":
        inner = (2 * x["R_m"] + 2 * x["Delta"] * np.sqrt(2 * np.log(1 / x["delta"]) / x["m"])
                 + x["Delta"] * np.sqrt(x["inf_kl"]) + x["eps"])
        return x["Lambda"] * inner
    if tag == "spectral":
        s = x["x_frobenius"] * x["R"]
        rad = 0.0 if s == 0 else 48 * s / x["m"] * (1 + np.log(x["m"] / (3 * s)))
        return (x["modeling_error"] + rad
                + 6 * x["Delta"] * np.sqrt(2 * np.log(2 / x["delta"]) / x["m"]) + x["eps"])
    raise DomainError(f"unknown formula tag {tag!r}")


# --------------------------------------------------------------------------- #
# compatibility coefficient


@dataclass
class CompatibilityReport:
    Lambda: float
    norms: list[float]
    dictionary: list[str]
    exact: bool
    decompositions: list[DecompositionResult] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"Lambda": self.Lambda, "norms": self.norms, "dictionary": self.dictionary,
                "exact": self.exact}


def anchor_grid(dim: int, per_axis: int = 5, half_width: float = 2.0) -> np.ndarray:
    axes = [np.linspace(-half_width, half_width, per_axis)] * dim
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)


def compatibility_coefficient(truth, generators: Sequence, dictionary: Dictionary | None = None,
                              degree: int = 2) -> CompatibilityReport:
    """``max_nu ||log(rho_nu / rho_truth)||_1`` over a monomial dictionary.

    For Gaussians the log ratio is an exact quadratic, so the anchor-restricted
    decomposition over the degree-2 monomials (plus the free constant) is exact.
    A dictionary that cannot represent some ratio raises IncompatibilityError.
    """
    dim = int(np.size(truth.mean))
    if dictionary is None:
        dictionary = monomial_dictionary(dim, degree, anchor_grid(dim))
    norms, decs = [], []
    for nu in generators:
        def ratio(X, nu=nu):
            return np.asarray(nu.log_density(X)) - np.asarray(truth.log_density(X))

        try:
            dec = f_variation_norm(ratio, dictionary)
        except NotInSpanError as exc:
            raise IncompatibilityError(
                "log-density ratio is not representable; the KL bound is vacuous") from exc
        norms.append(dec.norm)
        decs.append(dec)
    exact = all(d.residual < 1e-9 for d in decs)
    return CompatibilityReport(max(norms) if norms else 0.0, norms, list(dictionary.names), exact, decs)

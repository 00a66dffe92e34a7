"""Result and optimizer-configuration records shared by the estimators."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import ConfigurationError

SEMANTICS = ("exact", "lower_bound", "monte_carlo")


@dataclass(frozen=True)
class OptimizerConfig:
    """Projected-ascent schedule for an inner maximization over a family."""

    restarts: int = 10
    steps: int = 500
    step_size: float = 1e-2
    rule: str = "rmsprop"  # "constant" | "rmsprop"
    seed: int = 0
    rho: float = 0.9
    eps: float = 1e-8

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise ConfigurationError("restarts and steps must be >= 1")
        if not self.step_size > 0:
            raise ConfigurationError("step size must be positive")
        if self.rule not in ("constant", "rmsprop"):
            raise ConfigurationError(f"unknown step-size rule {self.rule!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class MetricEstimate:
    value: float
    kind: str
    semantics: str
    std_error: float | None = None
    restarts: int | None = None
    steps: int | None = None
    best_theta: np.ndarray | None = None
    best_sign: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.semantics not in SEMANTICS:
            raise ValueError(f"unknown semantics {self.semantics!r}")
        self.value = float(self.value)

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "value": self.value, "semantics": self.semantics}
        if self.std_error is not None:
            out["std_error"] = float(self.std_error)
        if self.restarts is not None:
            out["restarts"] = self.restarts
            out["steps"] = self.steps
        if self.best_theta is not None:
            out["best_theta"] = [float(v) for v in np.ravel(self.best_theta)]
            out["best_sign"] = self.best_sign
        out.update(self.extra)
        return out

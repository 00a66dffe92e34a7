"""Neural distances, IPM estimators, generalization bounds and toy GAN experiments."""

from .errors import (ConfigurationError, DegenerateDataError, DomainError, IncompatibilityError,
                     InvariantViolation, IpmlabError, NotInSpanError, ScaleError, UsageError)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "DegenerateDataError", "DomainError", "IncompatibilityError",
    "InvariantViolation", "IpmlabError", "NotInSpanError", "ScaleError", "UsageError",
    "__version__",
]

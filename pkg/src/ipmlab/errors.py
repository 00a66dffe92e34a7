"""Exception hierarchy.

Everything a caller can fix (bad inputs, bad configuration, infeasible
requests) derives from :class:`IpmlabError`; the CLI maps it to exit code 1.
:class:`InvariantViolation` signals a broken internal guarantee (exit 2).
"""


class IpmlabError(Exception):
    """Base class for user-facing errors."""


class DomainError(IpmlabError, ValueError):
    """An argument lies outside the domain of a formula."""


class ConfigurationError(IpmlabError, ValueError):
    """Incompatible or malformed configuration."""


class UsageError(IpmlabError, ValueError):
    """Wrong call shape (dimension mismatch, unsupported family, ...)."""


class DegenerateDataError(IpmlabError, ValueError):
    """Sample statistics are singular."""


class ScaleError(IpmlabError, ValueError):
    """Problem instance exceeds the supported desk scale."""


class NotInSpanError(IpmlabError):
    """Target function cannot be represented over the dictionary anchors."""


class IncompatibilityError(NotInSpanError):
    """A log-density ratio is not representable by the discriminator dictionary."""


class InvariantViolation(Exception):
    """An internal guarantee failed."""

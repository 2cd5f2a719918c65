"""Exception hierarchy shared by the library and the command line."""


class QMSError(ValueError):
    """Base class for every error raised on purpose by this package."""

    kind = "error"


class ConfigError(QMSError):
    """Run configuration is incomplete or contradictory."""

    kind = "config_error"


class ValidationError(QMSError):
    """Input to a library operation violates its precondition."""

    kind = "validation_error"


class DomainError(QMSError):
    """A closed-form expression is undefined for the requested parameters."""

    kind = "domain_error"


class KernelError(QMSError):
    """A measurement kernel failed validation."""

    kind = "kernel_error"


class SamplingError(QMSError):
    """Record sampling cannot proceed (sample size, spectral aliasing)."""

    kind = "sampling_error"

"""Exception types shared across the package.

Each class carries a short machine-readable ``kind`` so the CLI can emit
structured errors on the diagnostic stream.
"""


class NskvError(Exception):
    kind = "error"


class DomainError(NskvError, ValueError):
    """An argument is outside the mathematical domain of the operation."""

    kind = "domain"


class PreconditionError(NskvError, ValueError):
    """A documented precondition on the input data is violated."""

    kind = "precondition"


class ConfigError(NskvError, ValueError):
    """Invalid, inconsistent, or out-of-range configuration."""

    kind = "config"


class IntegrityError(NskvError, IOError):
    """A snapshot file failed magic/CRC/size validation."""

    kind = "integrity"


class UnsupportedVersionError(NskvError, IOError):
    """A snapshot file has a format version this build cannot read."""

    kind = "version"


class NoConvergenceError(NskvError, RuntimeError):
    """An iteration failed to contract; typically the horizon is too long."""

    kind = "no-convergence"

"""Exception types raised across the package."""


class RegDilError(Exception):
    """Base class for all package errors."""


class DimensionError(RegDilError, ValueError):
    """Shapes or vector lengths do not match."""


class DomainError(RegDilError, ValueError):
    """Argument outside the domain of an operation."""


class ResourceError(RegDilError):
    """Flattened dimension exceeds the configured cap."""


class UnsupportedError(RegDilError, ValueError):
    """Generator parameters that no finite model can realize."""


class PreconditionError(RegDilError):
    """An operation was called on input that violates its precondition."""


class InconsistencyError(RegDilError):
    """Two objects that should describe the same thing do not."""


class CoherenceError(RegDilError, ValueError):
    """A twist family fails unitarity or the braid (hexagon) relation."""


class DilationRefused(RegDilError):
    """Condition (D) fails, so no regular isometric dilation exists.

    The certificate that triggered the refusal is kept on ``certificate``.
    """

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate

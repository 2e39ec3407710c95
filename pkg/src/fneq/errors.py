"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate an operation's preconditions."""


class ZeroNormError(InvalidInputError):
    """Raised when a direction is requested for a zero vector."""


class DomainError(InvalidInputError):
    """Raised when a value falls outside the mathematically valid domain."""


class CorruptionError(RuntimeError):
    """Raised when stored codes or index files fail integrity checks."""

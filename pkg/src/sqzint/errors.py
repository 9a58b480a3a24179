"""Exception types shared across the package."""


class SqzintError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SqzintError, ValueError):
    """Invalid input: malformed config, non-unitary matrix, broken precondition."""


class ResourceLimitError(SqzintError, RuntimeError):
    """A guarded combinatorial size was exceeded (raise the limit explicitly to proceed)."""


class ToleranceError(SqzintError, ArithmeticError):
    """An internal numerical cross-check failed beyond its stated tolerance."""

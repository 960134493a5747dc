"""Exception types shared across the package."""


class DeltaColorError(Exception):
    """Base class for all package errors."""


class ValidationError(DeltaColorError, ValueError):
    """Malformed input, bad parameter, or violated precondition."""


class InvariantViolation(DeltaColorError, RuntimeError):
    """An internal consistency rule was broken; indicates a bug upstream."""


class GenerationError(DeltaColorError, RuntimeError):
    """A graph generator could not satisfy its constraints."""

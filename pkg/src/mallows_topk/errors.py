"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class DimensionError(ValidationError):
    """Operands disagree on the number of items."""


class SizeError(ValidationError):
    """Problem size exceeds what exhaustive enumeration supports."""


class VacuousBoundError(ValueError):
    """Requested theoretical bound is vacuous for these parameters."""

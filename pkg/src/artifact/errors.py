"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Raised for invalid parameters (bad divisor, malformed sequence, ...)."""


class BudgetError(RuntimeError):
    """Raised when an enumeration would exceed its declared budget."""


class WidenField(RuntimeError):
    """Raised when the ambient field is too small for a requested solve."""


class ConsistencyError(AssertionError):
    """Raised when an internal cross-check fails (signals a bug or a false claim)."""

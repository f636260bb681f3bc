"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Rejected input: bad costs, indices, parameters or configs."""


class UnsupportedSizeError(InvalidInputError):
    """Instance size above the cap supported by an operation."""


class BudgetExceededError(InvalidInputError):
    """Simulation config asks for more cost draws than the budget allows."""


class NumericalError(ArithmeticError):
    """Internal consistency check failed; indicates a bug, not bad input."""

"""Exception types shared across the package."""


class UsageError(ValueError):
    """Invalid arguments or parameters supplied by the caller."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericError(ArithmeticError):
    """A numerical quantity that should be nonzero came out degenerate."""

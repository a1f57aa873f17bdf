class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation (s <= 0, p < 1, ...)."""


class SingularityError(ValueError):
    """Raised when a principal-value integral is evaluated on a breakpoint."""


class UnsupportedNormError(ValueError):
    """Raised for (input kind, space) combinations that have no norm formula."""


class DegenerateInputError(ValueError):
    """Raised when a ratio is requested for an input with a vanishing denominator."""


class NumericalError(RuntimeError):
    """Raised when an iterative routine (Jacobi sweeps, simplex pivots) fails to converge."""

"""Exception hierarchy shared by every module."""


class IterMeansError(Exception):
    """Base class for all library errors."""


class DomainError(IterMeansError, ValueError):
    """An argument lies outside the domain of a function or operation."""


class RangeError(IterMeansError, ValueError):
    """A value to invert lies outside the codomain of a function."""


class MonotonicityError(IterMeansError, ValueError):
    """A function failed the strict monotonicity check."""


class GeneratorClassError(IterMeansError, ValueError):
    """A generator is of the wrong class (Above/Below) for a construction."""


class NoConvergence(IterMeansError, ArithmeticError):
    """An iterative numerical procedure did not converge within its budget."""


class DivergenceError(IterMeansError, ArithmeticError):
    """An infinite product of inverse iterates does not converge.

    ``terms`` is the number of factors inspected before giving up and
    ``witness`` the point at which divergence was observed.
    """

    def __init__(self, message, *, terms=None, witness=None):
        super().__init__(message)
        self.terms = terms
        self.witness = witness


class ParseError(IterMeansError, ValueError):
    """Malformed expression text."""

    def __init__(self, message, position=0, expected=()):
        self.message = message
        self.position = position
        self.expected = tuple(expected)
        detail = f"{message} at offset {position}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)

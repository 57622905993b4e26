"""Exception hierarchy shared by every module."""


class MarkovError(Exception):
    """Base class for all package errors."""


class InvalidInputError(MarkovError, ValueError):
    """Malformed input: mismatched spaces, bad labels, non-stochastic rows."""


class NumericalDegeneracyError(MarkovError, ArithmeticError):
    """A numerical procedure met a structure it cannot resolve reliably."""


class NonReturningError(MarkovError, ValueError):
    """A chain started in K escapes to a closed class that avoids K."""


class AmbiguousLimitError(MarkovError, ValueError):
    """The long-run limit depends on the initial state (several ergodic classes)."""

    def __init__(self, message, classes=None):
        super().__init__(message)
        self.classes = classes or []

"""Exception types raised across the package."""


class StochSpecError(Exception):
    """Base class for all package errors."""


class NonSymmetric(StochSpecError, ValueError):
    pass


class ShapeMismatch(StochSpecError, ValueError):
    pass


class EigenFailure(StochSpecError, ArithmeticError):
    pass


class NotConjugateClosed(StochSpecError, ValueError):
    pass


class NotAnEigenvalue(StochSpecError, ValueError):
    pass


class SpecInvalid(StochSpecError, ValueError):
    pass


class NotControllable(StochSpecError, ValueError):
    """The pair (G, F) fails the controllability test.

    ``rcond`` carries the reciprocal condition number of the
    controllability matrix so callers can report how close it was.
    """

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class RankDeficient(StochSpecError, ValueError):
    pass


class BadShape(StochSpecError, ValueError):
    pass


class DefectiveEigenstructure(StochSpecError, ValueError):
    pass


class IndexSearchExhausted(StochSpecError, RuntimeError):
    pass


class NonFinite(StochSpecError, ArithmeticError):
    pass


class ParseError(StochSpecError, ValueError):
    pass


class ValidationError(StochSpecError, ValueError):
    """Config validation failure; ``problems`` lists every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

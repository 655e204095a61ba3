"""Exception hierarchy shared by every module."""


class DuoDivError(Exception):
    """Base class for all library errors."""


class DomainError(DuoDivError, ValueError):
    """A parameter lies outside the domain of a generator or map."""


class ConvergenceError(DuoDivError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class DominanceError(DuoDivError, ValueError):
    """The generator pair does not satisfy the required majorization."""


class AlphaError(DuoDivError, ValueError):
    """A skew parameter is outside the open unit interval."""


class ParamError(DuoDivError, ValueError):
    """A source parameter is outside its admissible range."""


class SupportError(DuoDivError, ValueError):
    """A point lies outside the support of a density."""


class FamilyMismatchError(DuoDivError, ValueError):
    pass


class UnsupportedPairError(DuoDivError, ValueError):
    pass


class NestingError(DuoDivError, ValueError):
    """Supports are neither nested nor reverse-nested."""


class DegenerateError(DuoDivError, ArithmeticError):
    """A truncation window carries no numerically representable mass."""


class ToleranceError(DuoDivError, RuntimeError):
    """The oracle could not certify its requested tolerance.

    The best available estimate is attached as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result

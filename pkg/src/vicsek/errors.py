"""Exception hierarchy shared by all modules."""


class VicsekError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(VicsekError, ValueError):
    pass


class RootCountMismatch(VicsekError, ArithmeticError):
    """Grid bracketing did not isolate the expected number of simple roots."""


class DomainError(VicsekError, ValueError):
    pass


class CapacityExceeded(VicsekError):
    pass


class EmptyInterior(VicsekError, ValueError):
    pass


class NotSymmetric(VicsekError, ValueError):
    pass


class TopValueExcluded(VicsekError, ValueError):
    pass


class ForbiddenEigenvalue(VicsekError, ValueError):
    pass


class NearForbidden(VicsekError, ValueError):
    pass


class SingularSystem(VicsekError, ArithmeticError):
    pass


class NotAnEigenfunction(VicsekError, ValueError):
    pass


class InconclusiveBound(VicsekError):
    """No witness was found below the search bound, but one exists beyond it."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class OmegaParseError(VicsekError, ValueError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position

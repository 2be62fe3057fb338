"""Exception types raised across the package."""


class PearlError(Exception):
    """Base class for all package errors."""


class InvalidRadius(PearlError, ValueError):
    pass


class NotABall(PearlError, ValueError):
    """The sphere is a hyperplane and has no finite center."""


class InvalidHalfSpace(PearlError, ValueError):
    pass


class NotInPage(PearlError, ValueError):
    """Spin of a sphere whose center has a nonzero fourth coordinate."""


class EmptyNecklace(PearlError, ValueError):
    pass


class ConstructionInfeasible(PearlError):
    def __init__(self, message, constraints=()):
        super().__init__(message)
        self.constraints = list(constraints)


class OverlapViolation(PearlError):
    def __init__(self, message, offender=None):
        super().__init__(message)
        self.offender = offender


class ValidationRequired(PearlError):
    pass


class InvalidEpsilon(PearlError, ValueError):
    pass


class InsufficientDepth(PearlError):
    pass


class BudgetExceeded(PearlError):
    """Raised when an orbit expansion outgrows its ball budget.

    ``frontier`` holds the state reached so far so the caller can write a
    checkpoint and resume later.
    """

    def __init__(self, message, frontier=None):
        super().__init__(message)
        self.frontier = frontier


class OddWord(PearlError, ValueError):
    pass


class NotLiftable(PearlError, ValueError):
    pass


class ConfigError(PearlError, ValueError):
    pass

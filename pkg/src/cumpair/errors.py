"""Exception types raised across the package."""


class CumpairError(ValueError):
    """Base class for all domain errors."""


class EmptySample(CumpairError):
    pass


class NonFiniteInput(CumpairError):
    pass


class OrderOutOfRange(CumpairError):
    pass


class MissingCumulant(CumpairError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidModel(CumpairError):
    pass


class DegenerateQuadratic(CumpairError):
    """Leading coefficient of the ratio quadratic is numerically zero.

    At population level this is exactly the no-edge regime.
    """


class ComplexRoots(CumpairError):
    pass


class DegenerateRoots(CumpairError):
    pass


class DivisionNearZero(CumpairError):
    pass


class NegativeUnderRoot(CumpairError):
    pass


class TooManyFailedReplicates(CumpairError):
    pass


class ParseError(CumpairError):
    pass

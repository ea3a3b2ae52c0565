"""Exception hierarchy shared by all modules."""


class MomentForgeError(Exception):
    """Base class for every error raised by momentforge."""


class EmptyInput(MomentForgeError, ValueError):
    pass


class NonInteriorMoments(MomentForgeError, ValueError):
    """A moment vector lies on the boundary of, or outside, its moment space.

    ``index`` is the 1-based position of the first native coordinate that
    left its open range; ``value`` is that coordinate when it was computable.
    """

    def __init__(self, message, index=None, value=None):
        super().__init__(message)
        self.index = index
        self.value = value


class NotPositiveDefinite(NonInteriorMoments):
    pass


class NonPositiveOffDiagonal(MomentForgeError, ValueError):
    pass


class ZeroScale(MomentForgeError, ValueError):
    pass


class ConditioningWarning(UserWarning):
    pass


class RejectionBudgetExceeded(MomentForgeError, RuntimeError):
    pass


class PointNotInBoundedSpace(MomentForgeError, ValueError):
    pass


class NonPositiveShape(MomentForgeError, ValueError):
    pass


class ConvergenceFailure(MomentForgeError, RuntimeError):
    pass


class UnsupportedBeta(MomentForgeError, ValueError):
    pass


class SingularMatrix(MomentForgeError, ValueError):
    pass


class TooFewSamples(MomentForgeError, ValueError):
    pass


class EvaluationFailure(MomentForgeError, RuntimeError):
    pass


class EnvelopeViolation(MomentForgeError, ValueError):
    """A weight function exceeded the upper bound supplied for it."""

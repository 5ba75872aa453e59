"""Exception types raised across the package."""


class SbpError(Exception):
    """Base class for all package errors."""


class UsageError(SbpError):
    """Invalid arguments or preconditions (caller bug, not a numerical event)."""


class NumericalError(SbpError):
    """A numerical condition prevents the requested computation."""


# -- argument / precondition violations ---------------------------------------

class InvalidN(UsageError):
    pass


class GridTooSmall(UsageError):
    pass


class MissingAlpha(UsageError):
    pass


class MissingParameter(UsageError):
    pass


class InvalidPhi(UsageError):
    pass


class NormMismatch(UsageError):
    pass


class NotSymmetric(UsageError):
    pass


# -- numerical events ----------------------------------------------------------

class SingularMatrix(NumericalError):
    pass


class SingularInterior(NumericalError):
    """The interior block of A is numerically singular (alpha at the stability limit)."""


class SingularSystem(NumericalError):
    """A boundary-modified system is singular (e.g. Dirichlet penalty at its limit)."""


class BorrowingUnavailable(NumericalError):
    """No positive borrowing capacity exists for this operator."""


class InconsistentSystem(NumericalError):
    """A closure system that should be solvable has a large minimal residual."""


class CalibrationAmbiguous(NumericalError):
    """The first-derivative parameter map could not be pinned down."""


class TransformResidual(NumericalError):
    """A congruence transform did not produce the expected block structure."""


class NoCrossing(NumericalError):
    """A bisection target has no sign change in the search interval."""


class UnstableStep(NumericalError):
    """Time integration blew up.  Carries the error history up to the blow-up."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history

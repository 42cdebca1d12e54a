class SurfaceRepsError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(SurfaceRepsError, ValueError):
    pass


class PreconditionError(SurfaceRepsError, ValueError):
    pass


class FactorizationError(SurfaceRepsError, ArithmeticError):
    pass


class UnsupportedGroupError(SurfaceRepsError, ValueError):
    pass


class NotARepresentationError(PreconditionError):
    """Raised when mu(x) is not the identity but a representation is required."""


class CharacterizationError(PreconditionError):
    """Raised when beta(x) is not phi.x for the supplied phi."""


class SignatureError(SurfaceRepsError, ValueError):
    pass


class IndeterminateError(SurfaceRepsError, ArithmeticError):
    """A numerical rank decision fell inside the ambiguous spectrum gap."""


class ConditioningWarning(UserWarning):
    pass


class NoSolutionFound(SurfaceRepsError):
    """A local solver stopped without meeting its tolerance; not a proof of infeasibility."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual

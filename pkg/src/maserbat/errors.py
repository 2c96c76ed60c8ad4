"""Exception types shared across the package."""


class MaserbatError(Exception):
    """Base class for all package errors."""


class ValidationError(MaserbatError):
    """An input violates a documented invariant (shape, range, hermiticity...)."""


class TruncationOverflowError(MaserbatError):
    """Population reached the top of the truncated Fock space; results untrustworthy.

    Carries the collision index at which the monitor fired (None for a
    single standalone collision).
    """

    def __init__(self, message, collision=None, top_population=None):
        super().__init__(message)
        self.collision = collision
        self.top_population = top_population


class OptimizationError(MaserbatError):
    """Every optimizer restart failed to produce a finite loss."""

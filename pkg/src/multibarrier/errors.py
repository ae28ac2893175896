"""Exception hierarchy. CLI exit codes map onto the two top-level branches."""


class MultiBarrierError(Exception):
    """Base class for all package errors."""


class DomainError(MultiBarrierError, ValueError):
    """Input outside the documented domain of an operation."""


class NumericalError(MultiBarrierError, ArithmeticError):
    """A computation could not be carried out to the required accuracy."""


class SingularParameterError(DomainError):
    """Evaluation at a genuine singularity, e.g. e equal to the barrier height."""


class DegenerateDirectionError(DomainError):
    """A polar decomposition has a vanishing normalizer."""


class UnderResolvedError(DomainError):
    """The grid is too coarse to represent the potential."""


class StabilityError(DomainError):
    """Time step violates the dt < dx**2 guard."""


class InsufficientDataError(DomainError):
    """Too few levels for a statistical operation."""


class IllConditionedError(NumericalError):
    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class TransferOverflowError(NumericalError):
    """Matrix products left the floating point range."""


class PoleProximityError(NumericalError):
    """|Q22| is so small that the S-matrix is numerically undefined."""


class AccuracyError(NumericalError):
    """Accumulated drift of a conserved quantity exceeded tolerance."""


class AccuracyWarning(UserWarning):
    """Drift of a conserved quantity is larger than expected but tolerated."""

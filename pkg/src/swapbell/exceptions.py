"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all errors raised by swapbell."""


class InvalidArgument(SimulationError, ValueError):
    """An argument violates a documented precondition."""


class SingularMatrixError(SimulationError):
    """A covariance matrix that must be invertible is (numerically) singular."""

    def __init__(self, message, condition_number=None):
        if condition_number is not None:
            message = f"{message} (condition number {condition_number:.3e})"
        super().__init__(message)
        self.condition_number = condition_number


class HeraldImpossibleError(SimulationError):
    """The heralding probability came out non-positive; indicates a bad state."""


class PrecisionError(SimulationError):
    """A truncated computation cannot reach the requested tolerance."""


class SolverFailure(SimulationError):
    """The linear-programming solver could not complete reliably."""


class ConsistencyError(SimulationError):
    """An internal cross-check (e.g. no-signalling) failed beyond tolerance."""

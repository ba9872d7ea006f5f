"""Exception hierarchy shared by the toolkit and mapped to CLI exit codes."""


class OpinionGameError(Exception):
    """Base class for all toolkit errors."""


class GraphError(OpinionGameError, ValueError):
    """Invalid graph or malformed graph document (exit code 2)."""


class NumericalError(OpinionGameError, ArithmeticError):
    """A numerical kernel failed or a computed identity did not hold (exit code 3)."""


class SingularMatrixError(NumericalError):
    pass


class NotPositiveDefiniteError(NumericalError):
    pass


class UnderdeterminedError(NumericalError):
    """A component has no anchoring internal opinion, so the optimum is not unique."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class UnsupportedError(OpinionGameError, ValueError):
    """Analysis not available for this instance class or size (exit code 4)."""

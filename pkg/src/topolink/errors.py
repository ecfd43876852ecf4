"""Exception types shared across the package."""


class TopolinkError(Exception):
    """Base class for errors raised by this package."""


class ParseError(TopolinkError):
    """Malformed edge-list text."""


class GraphConstructionError(TopolinkError):
    """Edge list cannot form a valid simple graph."""


class LoadError(TopolinkError):
    """Feature file does not match the expected layout."""


class SplitError(TopolinkError):
    """Edge split cannot be produced."""


class SamplingError(TopolinkError):
    """Not enough non-edges to satisfy a negative-sampling request."""


class ShapeError(TopolinkError):
    """Tensor operands have incompatible shapes."""


class ConvergenceError(TopolinkError):
    """Iterative solver failed to reach tolerance within its budget."""


class AlignmentError(TopolinkError):
    """Edge scores do not line up with the graph they are applied to."""


class NumericError(TopolinkError):
    """Non-finite values encountered where finite ones are required."""


class TrainingAbort(TopolinkError):
    """Training stopped early because the loss became non-finite."""

    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"training aborted at epoch {epoch}: non-finite loss")


class ConversionError(TopolinkError):
    """Dataset source directory does not match any recognized layout."""

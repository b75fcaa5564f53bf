"""Exception hierarchy shared by every stage of the link simulator."""


class BurstDFEError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(BurstDFEError, ValueError):
    """A parameter lies outside its supported domain."""


class SynchronizationError(BurstDFEError):
    """The training sequence could not be located in the received stream."""


class DivergenceError(BurstDFEError, FloatingPointError):
    """An adaptive filter produced a non-finite or runaway tap.

    Attributes
    ----------
    step : int
        Index of the symbol at which divergence was detected.
    """

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class EstimationError(BurstDFEError, ValueError):
    """A least-squares fit was ill posed (rank deficient or too few samples)."""


class StateSpaceTooLargeError(BurstDFEError, ValueError):
    """The requested trellis would exceed the configured state cap."""


class AlignmentError(BurstDFEError, ValueError):
    """Two sequences that must be compared element-wise differ in length."""

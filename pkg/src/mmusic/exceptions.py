"""Exception and warning types raised by the profiling pipeline."""


class MMusicError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(MMusicError, ValueError):
    """An argument violates a documented precondition."""


class NoDataError(MMusicError, ValueError):
    """No valid pulses are available for estimation."""


class InsufficientDataError(MMusicError, ValueError):
    """Too few valid sample pairs to build the requested covariance."""


class UnderdeterminedError(MMusicError, ValueError):
    """Fewer valid pulses than unknown amplitudes."""


class NoSignalError(MMusicError, ValueError):
    """Order selection found no signal subspace."""


class NumericError(MMusicError, ArithmeticError):
    """A linear-algebra routine failed or returned non-finite output."""


class ConditioningError(NumericError):
    """The steering matrix is numerically rank deficient.

    Attributes
    ----------
    delay_pair : tuple of float
        The two closest estimated delays, in seconds.
    condition : float
        Estimated condition number of the normal-equations matrix.
    """

    def __init__(self, message, delay_pair=None, condition=None):
        super().__init__(message)
        self.delay_pair = delay_pair
        self.condition = condition


class SizeRuleFallbackWarning(UserWarning):
    """The half-occupancy size rule admitted no usable matrix size."""

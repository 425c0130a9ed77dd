"""Shared exception types."""


class DivergenceError(ValueError):
    """The requested quantity is mathematically divergent for this bath."""


class RegimeError(ValueError):
    """A constant was requested outside the decoherence regime it belongs to."""


class AccuracyError(RuntimeError):
    """The quadrature could not meet the requested tolerance.

    Carries the best value obtained and the achieved error estimate so a
    caller can decide whether the degraded result is still usable.
    """

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate

class CalibMatchError(Exception):
    """Base class for all library errors."""


class InputError(CalibMatchError, ValueError):
    """Malformed numeric input (NaN, out-of-range, wrong dimension)."""


class CapacityError(CalibMatchError, ValueError):
    """Instance exceeds a hard size limit of a solver."""


class ConfigurationError(CalibMatchError, ValueError):
    """Inconsistent rules, scenarios or experiment configs."""


class ConvergenceError(CalibMatchError, RuntimeError):
    """Exact-mode calibration hit its iteration cap.

    The partial trace is attached so callers can dump it.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace

"""Exception hierarchy shared across the library."""


class OdeAccelError(Exception):
    """Base class for all library errors."""


class ConfigError(OdeAccelError):
    """Invalid configuration or rejected input (bad dimensions, unknown names, ...)."""


class DivergedError(OdeAccelError):
    """A state became non-finite or left its admissible domain during stepping."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class UnsupportedObjectiveError(OdeAccelError):
    """The requested operation needs objective metadata that is not available."""


class UnreliableEstimateError(OdeAccelError):
    """An empirical estimate would be dominated by floating-point noise."""


class StepSearchError(OdeAccelError):
    """No stable step size was found down to the search floor."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class InsufficientDataError(OdeAccelError):
    """Too few valid data points for a statistical fit."""

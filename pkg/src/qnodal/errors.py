"""Exception types raised across the package."""


class LabError(ValueError):
    """Base class for all lab errors."""


class ConfigurationError(LabError):
    pass


class ChartOverlapError(LabError):
    pass


class ModeError(LabError):
    pass


class EmptyEigenspaceError(LabError):
    pass


class ResolutionError(LabError):
    pass


class DegenerateTraceError(LabError):
    pass


class WindowError(LabError):
    pass


class OrderError(LabError):
    pass


class ParityError(LabError):
    pass


class FitError(LabError):
    pass


class GridError(LabError):
    pass


class RangeError(LabError):
    pass


class AliasingError(LabError):
    pass


class PreconditionError(LabError):
    pass


class QuadratureError(LabError):
    """Integrand produced a non-finite value; ``index`` is the offending node."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index

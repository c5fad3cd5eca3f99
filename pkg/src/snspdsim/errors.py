"""Exception types shared across the package."""


class SnspdSimError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SnspdSimError):
    """Invalid parameter value or inconsistent parameter combination."""


class PrecisionError(SnspdSimError):
    """A sampling grid is too coarse to resolve the requested dynamics."""


class FitError(SnspdSimError):
    """Not enough usable data points for a fit."""


class SimulationError(SnspdSimError):
    """Internal inconsistency detected while generating a click stream."""


class FormatError(SnspdSimError):
    """Malformed or unrecognizable time-tag file."""


class StreamValidationError(SnspdSimError):
    """Readable time-tag file whose contents violate stream invariants."""

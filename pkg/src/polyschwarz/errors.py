"""Exception hierarchy shared by all modules."""


class PolySchwarzError(ValueError):
    """Base class for every error raised by the library."""


class DimensionError(PolySchwarzError):
    pass


class SingularError(PolySchwarzError):
    """A denominator or Jacobian came too close to zero."""

    def __init__(self, message, magnitude=None):
        super().__init__(message)
        self.magnitude = magnitude


class SingularDivisorError(SingularError):
    pass


class SingularArgumentError(SingularError):
    pass


class SingularPointError(SingularError):
    pass


class TensorUndefinedError(SingularError):
    pass


class ContourRadiusError(PolySchwarzError):
    pass


class MetricBlowUpError(PolySchwarzError):
    pass


class NotNormalizedError(PolySchwarzError):
    pass


class PreconditionError(PolySchwarzError):
    pass


class MapFormatError(PolySchwarzError):
    """Malformed map-description document; ``location`` names the node path."""

    def __init__(self, message, location="$"):
        super().__init__(f"{location}: {message}")
        self.location = location

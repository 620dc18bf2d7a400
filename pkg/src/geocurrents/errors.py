"""Exception hierarchy shared by all modules."""


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class DegenerateConfiguration(GeometryError):
    pass


class InvalidAxis(GeometryError):
    pass


class OrientationMismatch(GeometryError):
    pass


class GeodesicsCross(GeometryError):
    pass


class SharedEndpoint(GeometryError):
    pass


class InvalidBox(GeometryError):
    pass


class NoConvergence(RuntimeError):
    pass


class NoSolutionInArc(GeometryError):
    pass


class LaminationError(GeometryError):
    pass


class CrossingLeaves(LaminationError):
    pass


class NonpositiveWeight(LaminationError):
    pass


class DuplicateLeaves(LaminationError):
    pass


class CrossingFamily(LaminationError):
    pass


class CannotSeparate(GeometryError):
    pass


class BaseOnLeaf(GeometryError):
    pass


class UnsupportedVariant(TypeError):
    pass


class ConfigError(ValueError):
    """Raised for malformed experiment configuration."""

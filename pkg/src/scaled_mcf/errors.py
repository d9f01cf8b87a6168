"""Exception types raised by the solver and the configuration layer."""


class GeometryBreakdown(RuntimeError):
    """The height function no longer describes a regular surface over the reference."""


class RangeViolation(RuntimeError):
    """The concentration left the interval on which the energy density is certified."""


class NoConvergence(RuntimeError):
    """A per-step fixed-point iteration failed to contract."""


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


class InvalidParameter(ValueError):
    """Geometric or material parameter outside its admissible set."""

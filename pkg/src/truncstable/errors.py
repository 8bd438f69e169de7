"""Exception hierarchy for the truncated-stable toolkit.

All toolkit errors derive from :class:`TruncStableError` so callers can catch
one base class; the CLI maps :class:`ConfigError` to exit code 2 and any other
failure to exit code 1.
"""

from __future__ import annotations


class TruncStableError(Exception):
    """Base class for all toolkit errors."""


class ParamOutOfRange(TruncStableError, ValueError):
    """A numeric parameter violates its documented range."""


class DimensionMismatch(TruncStableError, ValueError):
    """A point or vector has the wrong number of coordinates."""


class PointNotInterior(TruncStableError, ValueError):
    """A point required to lie inside a domain/ball does not."""


class PointNotExterior(TruncStableError, ValueError):
    """A point required to lie outside a closed ball does not."""


class CoincidentPoints(TruncStableError, ValueError):
    """Two points required to be distinct coincide (kernel singularity)."""


class RadiusTooLarge(TruncStableError, ValueError):
    """A ball radius exceeds the admissible range for the requested bound."""


class QuadratureDidNotConverge(TruncStableError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class StepLimitExceeded(TruncStableError, RuntimeError):
    """A sampling loop exceeded its iteration cap (pathological input)."""


class AllPathsCensored(TruncStableError, RuntimeError):
    """Every simulated path hit the time cap; no exit statistics available."""


class ExcessiveCensoring(TruncStableError, RuntimeError):
    """The censored-path fraction exceeds the experiment budget (10^-3)."""


class CapViolated(TruncStableError, ValueError):
    """A Harnack chain length exceeds the jump-range cap for the radius."""


class InsufficientHits(TruncStableError, RuntimeError):
    """Too few positive samples to form a meaningful estimate."""


class NoBoundaryPoint(TruncStableError, ValueError):
    """A point required to lie on the domain boundary does not (within 1e-9)."""


class ConfigError(TruncStableError, ValueError):
    """A scenario/config file is malformed (unknown or missing keys)."""

"""Shared value types: process parameters, quadrature settings, kernel results.

``ProcessParams`` pins the dimension d >= 2 and stability index alpha in (0, 2)
used everywhere else.  ``QuadratureConfig`` carries tolerance knobs for the
quadrature-backed kernel operations, and ``KernelValue`` is their common return
type (value plus an estimate of the numerical error).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParamOutOfRange


@dataclass(frozen=True)
class ProcessParams:
    """Parameters of the symmetric stable process and its truncated variant.

    Parameters
    ----------
    d : int
        Spatial dimension, at least 2.
    alpha : float
        Stability index, strictly between 0 and 2.
    """

    d: int
    alpha: float

    def __post_init__(self) -> None:
        if not isinstance(self.d, int) or isinstance(self.d, bool):
            raise ParamOutOfRange(f"dimension must be an integer, got {self.d!r}")
        if self.d < 2:
            raise ParamOutOfRange(f"dimension must be >= 2, got {self.d}")
        if not (0.0 < self.alpha < 2.0):
            raise ParamOutOfRange(f"alpha must lie in (0, 2), got {self.alpha}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for quadrature-backed kernel evaluations.

    ``rel_tol``/``abs_tol`` define the acceptance test
    ``est_error <= max(abs_tol, rel_tol * |value|)``; ``max_subdivisions``
    caps adaptive subdivision (1-D rules) or refinement levels (volume rules).
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ParamOutOfRange("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ParamOutOfRange("max_subdivisions must be >= 1")

    def accepts(self, value: float, est_error: float) -> bool:
        return est_error <= max(self.abs_tol, self.rel_tol * abs(value))


#: Default tolerances for d-dimensional (volume) quadratures, which use fixed
#: polar product rules with one refinement escalation rather than full adaptive
#: subdivision; their realistic accuracy is a few orders looser than 1-D quad.
VOLUME_QUAD = QuadratureConfig(rel_tol=2e-4, abs_tol=1e-10, max_subdivisions=2)


@dataclass(frozen=True)
class KernelValue:
    """A numerically evaluated kernel quantity with an error estimate."""

    value: float
    est_error: float

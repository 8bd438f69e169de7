"""Simulation and numerical verification toolkit for truncated stable processes.

The package is organized by concern:

* :mod:`truncstable.kernels` -- closed-form constants and ball kernels of the
  untruncated stable process, plus quadrature-based derived quantities.
* :mod:`truncstable.domains` -- geometry: membership, boundary distance, and
  bounding data for the domains used in the experiments.
* :mod:`truncstable.simulator` -- path simulation of the truncated process to
  domain exit and exact ball-exit sampling for the untruncated process.
* :mod:`truncstable.estimators` -- Monte Carlo estimates of harmonic measure,
  exit densities, occupation densities, and exit times.
* :mod:`truncstable.verify` -- scenario runner and CLI binding everything into
  named, machine-checkable experiments.
"""

from .errors import (
    AllPathsCensored,
    CapViolated,
    CoincidentPoints,
    ConfigError,
    DimensionMismatch,
    ExcessiveCensoring,
    InsufficientHits,
    NoBoundaryPoint,
    ParamOutOfRange,
    PointNotExterior,
    PointNotInterior,
    QuadratureDidNotConverge,
    RadiusTooLarge,
    StepLimitExceeded,
    TruncStableError,
)
from .params import KernelValue, ProcessParams, QuadratureConfig

__version__ = "0.1.0"

__all__ = [
    "AllPathsCensored",
    "CapViolated",
    "CoincidentPoints",
    "ConfigError",
    "DimensionMismatch",
    "ExcessiveCensoring",
    "InsufficientHits",
    "KernelValue",
    "NoBoundaryPoint",
    "ParamOutOfRange",
    "PointNotExterior",
    "PointNotInterior",
    "ProcessParams",
    "QuadratureConfig",
    "QuadratureDidNotConverge",
    "RadiusTooLarge",
    "StepLimitExceeded",
    "TruncStableError",
    "__version__",
]

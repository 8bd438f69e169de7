"""Simulation configuration and result records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..domains import DomainShape, bounding_ball
from ..errors import ParamOutOfRange

__all__ = ["ExitRecord", "OccupationGrid", "SimConfig"]


@dataclass(frozen=True)
class SimConfig:
    """Discretization and run parameters for truncated-process paths.

    ``epsilon`` is the jump cutoff: jumps in ``[epsilon, 1)`` are simulated
    exactly from an exponential clock; jumps below ``epsilon`` are replaced
    by a Brownian motion matching their variance (disable via
    ``gaussian_compensation`` to drop them instead).  ``time_step`` is the
    Gaussian step size ``h``; with ``boundary_refine`` the step shrinks near
    the boundary (floored at ``h / 64``) to suppress overshoot bias.  Paths
    exceeding ``max_time`` are censored, never errors.
    """

    epsilon: float
    time_step: float
    max_time: float = 1e3
    seed: int = 0
    boundary_refine: bool = True
    gaussian_compensation: bool = True

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ParamOutOfRange("epsilon must be in (0, 1)")
        if not (self.time_step > 0.0 and math.isfinite(self.time_step)):
            raise ParamOutOfRange("time_step must be positive and finite")
        if not (self.max_time > 0.0):
            raise ParamOutOfRange("max_time must be positive")
        if not (0 <= int(self.seed) < 2**64):
            raise ParamOutOfRange("seed must fit in 64 bits")


@dataclass(frozen=True)
class ExitRecord:
    """Outcome of one simulated path.

    ``by_jump`` distinguishes exits through a compound-Poisson jump from
    diffusive (discretization-channel) boundary crossings.  When
    ``censored`` is set the path hit ``max_time`` while still interior and
    the position fields hold the last interior state.
    """

    exit_position: np.ndarray
    exit_time: float
    by_jump: bool
    last_interior: np.ndarray
    censored: bool


@dataclass
class OccupationGrid:
    """Regular axis-aligned grid accumulating occupation time per cell.

    ``times`` has one entry per cell in row-major order over ``cells`` per
    axis; positions outside the grid accumulate nothing.
    """

    low: np.ndarray
    high: np.ndarray
    cells: tuple[int, ...]
    times: np.ndarray = field(default=None)

    def __post_init__(self):
        self.low = np.array(self.low, dtype=float)
        self.high = np.array(self.high, dtype=float)
        cells = tuple(int(c) for c in self.cells)
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ParamOutOfRange("grid corners must be vectors of equal length")
        if not np.all(self.low < self.high):
            raise ParamOutOfRange("grid needs low < high componentwise")
        if len(cells) != self.low.size or any(c < 1 for c in cells):
            raise ParamOutOfRange("need a positive cell count per axis")
        self.cells = cells
        if self.times is None:
            self.times = np.zeros(int(np.prod(cells)))
        else:
            self.times = np.asarray(self.times, dtype=float)
            if self.times.shape != (int(np.prod(cells)),):
                raise ParamOutOfRange("times length must equal the cell count")

    @classmethod
    def cover(cls, domain: DomainShape, cells_per_axis: int) -> "OccupationGrid":
        """Grid over the domain's bounding box, ``cells_per_axis`` per axis."""
        center, radius = bounding_ball(domain)
        return cls(
            center - radius,
            center + radius,
            (int(cells_per_axis),) * center.size,
        )

    @property
    def dim(self) -> int:
        return self.low.size

    @property
    def widths(self) -> np.ndarray:
        return (self.high - self.low) / np.array(self.cells, dtype=float)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.widths))

    def total_time(self) -> float:
        return float(self.times.sum())

    def cell_index(self, p) -> int:
        """Flat row-major index of the cell containing ``p`` (or -1)."""
        idx = np.floor((np.asarray(p, dtype=float) - self.low) / self.widths)
        if np.any(idx < 0) or np.any(idx >= self.cells):
            return -1
        flat = 0
        for i, n in zip(idx.astype(int), self.cells):
            flat = flat * n + i
        return flat

    def cell_centers(self) -> np.ndarray:
        """Centers of all cells, shape ``(n_cells, d)`` in row-major order."""
        axes = [
            self.low[i] + (np.arange(n) + 0.5) * self.widths[i]
            for i, n in enumerate(self.cells)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def copy_empty(self) -> "OccupationGrid":
        return OccupationGrid(self.low.copy(), self.high.copy(), self.cells)

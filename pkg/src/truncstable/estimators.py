"""Monte Carlo estimators of potential-theoretic quantities.

Every estimator turns a batch of simulated exits (or occupation records)
into an :class:`MCEstimate` — mean, standard error, sample count, seed, and
censored fraction — so downstream experiments can propagate uncertainty
uniformly.  Censored paths (those that hit the time cap before exiting) are
excluded from every estimate and reported through ``censored_fraction``;
experiments enforce a hard budget via :func:`require_censoring_budget`.

Ratio estimates (:func:`harnack_ratio_profile`) use common random numbers:
path ``i`` of the numerator and denominator runs consumes the identical
random stream, so the two indicator sequences are positively correlated and
the standard error uses the paired (delta-method) variance with the
same-index covariance term, not the independent-batch formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from .domains import (
    AnnulusSpec,
    AxisBox,
    Ball,
    BallUnion,
    DomainShape,
    contains_points,
)
from .domains import Annulus as AnnulusShape
from .errors import (
    AllPathsCensored,
    CapViolated,
    ConfigError,
    ExcessiveCensoring,
    InsufficientHits,
    ParamOutOfRange,
)
from .kernels import compute_r0, sphere_surface_area
from .params import ProcessParams
from .simulator import (
    ExitBatch,
    OccupationGrid,
    SimConfig,
    column_exit_weights,
    occupation_batch,
    simulate_exit_batch,
)

__all__ = [
    "MAX_CENSORED_FRACTION",
    "MCEstimate",
    "GridEstimate",
    "AnnulusTarget",
    "ShapeTarget",
    "PredicateTarget",
    "TargetSet",
    "annulus_target",
    "shape_target",
    "predicate_target",
    "target_contains",
    "target_volume",
    "require_censoring_budget",
    "harmonic_measure",
    "exit_density_histogram",
    "green_density",
    "mean_exit_time",
    "harnack_ratio_profile",
    "column_exit_estimates",
]

#: Hard budget on the censored-path fraction for qualified experiments.
MAX_CENSORED_FRACTION = 1e-3


# --------------------------------------------------------------------------
# result types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    """A Monte Carlo estimate with its sampling uncertainty.

    ``stderr`` is the sample standard deviation over the √(sample count);
    for indicator samples this is the binomial standard error (up to the
    ``n/(n-1)`` Bessel factor).  ``n`` counts the paths actually used, i.e.
    the non-censored ones.
    """

    mean: float
    stderr: float
    n: int
    seed: int
    censored_fraction: float

    def __post_init__(self) -> None:
        if not (self.stderr >= 0.0):
            raise ParamOutOfRange("stderr must be nonnegative")
        if not (0.0 <= self.censored_fraction <= 1.0):
            raise ParamOutOfRange("censored_fraction must lie in [0, 1]")
        if self.n < 1:
            raise ParamOutOfRange("need at least one sample")


@dataclass(frozen=True)
class GridEstimate:
    """Per-cell occupation-density estimates over an occupation grid.

    ``means``/``stderrs`` are flat arrays in the grid's row-major cell
    order, in units of time per unit volume (the cell-averaged Green
    density).  ``cell`` exposes a single cell as an :class:`MCEstimate`.
    """

    grid: OccupationGrid
    means: np.ndarray
    stderrs: np.ndarray
    n: int
    seed: int
    censored_fraction: float

    def cell(self, flat_index: int) -> MCEstimate:
        return MCEstimate(
            mean=float(self.means[flat_index]),
            stderr=float(self.stderrs[flat_index]),
            n=self.n,
            seed=self.seed,
            censored_fraction=self.censored_fraction,
        )

    def integral(self) -> float:
        """Integral of the density over the grid: the mean occupied time."""
        return float(self.means.sum() * self.grid.cell_volume)


# --------------------------------------------------------------------------
# target sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusTarget:
    """Radial shell target ``r_inner <= |y - center| < r_outer``."""

    spec: AnnulusSpec


@dataclass(frozen=True)
class ShapeTarget:
    """Target given by membership in a domain shape."""

    shape: DomainShape


@dataclass(frozen=True)
class PredicateTarget:
    """Target given by a named vectorized membership predicate.

    ``fn`` maps an ``(m, d)`` array of points to a boolean array of length
    ``m``.  The name identifies the predicate in reports.
    """

    name: str
    fn: Callable[[np.ndarray], np.ndarray]


TargetSet = Union[AnnulusTarget, ShapeTarget, PredicateTarget]


def annulus_target(center, r_inner: float, r_outer: float) -> AnnulusTarget:
    return AnnulusTarget(AnnulusSpec(np.asarray(center, dtype=float), r_inner, r_outer))


def shape_target(shape: DomainShape) -> ShapeTarget:
    return ShapeTarget(shape)


def predicate_target(name: str, fn: Callable[[np.ndarray], np.ndarray]) -> PredicateTarget:
    return PredicateTarget(name, fn)


def target_contains(target: TargetSet, points: np.ndarray) -> np.ndarray:
    """Vectorized membership of ``points`` (``(m, d)``) in ``target``."""
    pts = np.asarray(points, dtype=float)
    if isinstance(target, AnnulusTarget):
        return target.spec.contains_points(pts)
    if isinstance(target, ShapeTarget):
        return contains_points(target.shape, pts)
    if isinstance(target, PredicateTarget):
        out = np.asarray(target.fn(pts), dtype=bool)
        if out.shape != (pts.shape[0],):
            raise ConfigError(
                f"predicate {target.name!r} returned shape {out.shape}, "
                f"expected ({pts.shape[0]},)"
            )
        return out
    raise ConfigError(f"unsupported target type {type(target).__name__}")


def _unit_ball_volume(d: int) -> float:
    return sphere_surface_area(d) / d


def target_volume(target: TargetSet, d: int) -> float:
    """Lebesgue volume of a target cell (needed for density estimates)."""
    vol_unit = _unit_ball_volume(d)
    if isinstance(target, AnnulusTarget):
        spec = target.spec
        return vol_unit * (spec.r_outer**d - spec.r_inner**d)
    if isinstance(target, ShapeTarget):
        shape = target.shape
        if isinstance(shape, Ball):
            return vol_unit * shape.radius**d
        if isinstance(shape, AnnulusShape):
            return vol_unit * (shape.r_outer**d - shape.r_inner**d)
        if isinstance(shape, AxisBox):
            return float(np.prod(shape.high - shape.low))
        raise ConfigError(
            f"no closed-form volume for shape {type(shape).__name__}; "
            "use annulus, ball, or box cells"
        )
    raise ConfigError(
        f"no closed-form volume for target {type(target).__name__}; "
        "predicate targets cannot be density cells"
    )


# --------------------------------------------------------------------------
# shared plumbing
# --------------------------------------------------------------------------


def require_censoring_budget(estimate) -> None:
    """Fail loudly when censoring exceeds the experiment budget."""
    frac = estimate.censored_fraction
    if frac > MAX_CENSORED_FRACTION:
        raise ExcessiveCensoring(
            f"censored fraction {frac:.2e} exceeds budget {MAX_CENSORED_FRACTION:.0e}"
        )


def _kept_mask(batch: ExitBatch) -> Tuple[np.ndarray, float]:
    kept = ~batch.censored
    frac = 1.0 - kept.mean() if batch.n else 1.0
    if not kept.any():
        raise AllPathsCensored(
            f"all {batch.n} paths were censored at the time cap"
        )
    return kept, float(frac)


def _indicator_estimate(
    hits: np.ndarray, n_kept: int, seed: int, frac: float
) -> MCEstimate:
    count = int(np.count_nonzero(hits))
    mean = count / n_kept
    if n_kept > 1:
        var = mean * (1.0 - mean) * n_kept / (n_kept - 1)
        stderr = math.sqrt(var / n_kept)
    else:
        stderr = 0.0
    return MCEstimate(mean, stderr, n_kept, seed, frac)


# --------------------------------------------------------------------------
# estimators
# --------------------------------------------------------------------------


def harmonic_measure(
    params: ProcessParams,
    domain: DomainShape,
    x,
    target: TargetSet,
    n: int,
    config: SimConfig,
    *,
    stream_base: int = 0,
) -> MCEstimate:
    """Probability that the process started at ``x`` exits ``domain`` into
    ``target``: the canonical regular harmonic function of the target.

    The mean is an exact fraction (hit count over non-censored count), so
    estimates over disjoint targets from the same seed add exactly.
    """
    batch = simulate_exit_batch(params, domain, x, config, n, stream_base)
    kept, frac = _kept_mask(batch)
    hits = target_contains(target, batch.positions[kept])
    return _indicator_estimate(hits, int(kept.sum()), config.seed, frac)


def exit_density_histogram(
    params: ProcessParams,
    domain: DomainShape,
    x,
    partition: Sequence[TargetSet],
    n: int,
    config: SimConfig,
    *,
    stream_base: int = 0,
) -> List[MCEstimate]:
    """Cell-averaged exit density over a disjoint partition of cells.

    One batch of paths is shared across all cells; each cell's harmonic
    measure is divided by the cell's volume.  Overlapping cells (detected
    at sampled exit positions) are rejected.
    """
    if not partition:
        raise ConfigError("partition must contain at least one cell")
    batch = simulate_exit_batch(params, domain, x, config, n, stream_base)
    kept, frac = _kept_mask(batch)
    pts = batch.positions[kept]
    n_kept = int(kept.sum())
    membership = np.stack([target_contains(c, pts) for c in partition])
    per_point = membership.sum(axis=0)
    if (per_point > 1).any():
        raise ConfigError("partition cells overlap at sampled exit positions")
    out: List[MCEstimate] = []
    for idx, cell in enumerate(partition):
        vol = target_volume(cell, params.d)
        est = _indicator_estimate(membership[idx], n_kept, config.seed, frac)
        out.append(
            MCEstimate(est.mean / vol, est.stderr / vol, est.n, est.seed, frac)
        )
    return out


def green_density(
    params: ProcessParams,
    domain: DomainShape,
    x,
    grid: OccupationGrid,
    n: int,
    config: SimConfig,
    *,
    stream_base: int = 0,
) -> GridEstimate:
    """Cell-averaged occupation density: mean time per path spent in each
    cell, divided by cell volume.  Estimates the cell-averaged Green
    density of the domain at source ``x``.

    The input grid is not mutated; a fresh copy accumulates the batch.
    """
    work = grid.copy_empty()
    sq = np.zeros_like(work.times)
    work, batch = occupation_batch(
        params, domain, x, work, config, n, stream_base, occ_sq=sq
    )
    kept, frac = _kept_mask(batch)
    m = int(kept.sum())
    vol = work.cell_volume
    means = work.times / m
    if m > 1:
        var = (sq - work.times**2 / m) / (m - 1)
        np.maximum(var, 0.0, out=var)
        stderrs = np.sqrt(var / m)
    else:
        stderrs = np.zeros_like(means)
    return GridEstimate(
        grid=work,
        means=means / vol,
        stderrs=stderrs / vol,
        n=m,
        seed=config.seed,
        censored_fraction=frac,
    )


def mean_exit_time(
    params: ProcessParams,
    domain: DomainShape,
    x,
    n: int,
    config: SimConfig,
    *,
    stream_base: int = 0,
) -> MCEstimate:
    """Sample mean of the exit time over non-censored paths."""
    batch = simulate_exit_batch(params, domain, x, config, n, stream_base)
    kept, frac = _kept_mask(batch)
    times = batch.times[kept]
    m = times.size
    stderr = float(times.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return MCEstimate(float(times.mean()), stderr, m, config.seed, frac)


def column_exit_estimates(
    params: ProcessParams,
    domain: DomainShape,
    start,
    tops: Sequence[float],
    half_width: float,
    n: int,
    config: SimConfig,
    *,
    stream_base: int = 0,
) -> Tuple[List[MCEstimate], np.ndarray]:
    """Probability of exiting into each column ``{|z1| <= half_width,
    z2 <= top}``, via per-path jump-intensity weights (planar only).

    Wraps :func:`truncstable.simulator.column_exit_weights`: each path's
    weight is its conditional expected number of jumps into the column, an
    unbiased per-path estimate of the exit probability that stays useful
    when the probability is orders of magnitude below ``1/n``.  Returns one
    estimate per column plus the count of paths with positive weight (the
    effective support of each estimate).
    """
    weights, batch = column_exit_weights(
        params, domain, start, tops, half_width, config, n, stream_base
    )
    kept, frac = _kept_mask(batch)
    vals = weights[kept]
    m = vals.shape[0]
    estimates: List[MCEstimate] = []
    for k in range(vals.shape[1]):
        col = vals[:, k]
        stderr = float(col.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        estimates.append(MCEstimate(float(col.mean()), stderr, m, config.seed, frac))
    positive = (vals > 0.0).sum(axis=0).astype(np.int64)
    return estimates, positive


def harnack_ratio_profile(
    params: ProcessParams,
    centers: Tuple[np.ndarray, np.ndarray],
    r: float,
    far_target: TargetSet,
    n: int,
    config: SimConfig,
) -> Tuple[float, float, float]:
    """Ratio u(x1)/u(x2) of the harmonic measure of ``far_target`` on exit
    from the union of the two balls B(x1, r) and B(x2, r), with the paired
    standard error and the separation multiple M = max(1, |x1-x2|/r).

    The two centers must satisfy |x1-x2| <= M*r with M <= 1/r - 1/2 (the
    jump-range cap); beyond the cap the two balls stop communicating by a
    single jump and the ratio bound genuinely fails, so exceeding it is a
    hard :class:`CapViolated` error rather than a warning.

    Common random numbers: path ``i`` from x1 and path ``i`` from x2 use
    the same stream, so the standard error subtracts the same-index
    covariance (delta method for a ratio of correlated means).
    """
    x1 = np.asarray(centers[0], dtype=float)
    x2 = np.asarray(centers[1], dtype=float)
    if x1.shape != (params.d,) or x2.shape != (params.d,):
        raise ParamOutOfRange("centers must be d-vectors")
    if not (0.0 < r):
        raise ParamOutOfRange("ball radius must be positive")
    r0 = compute_r0(params)
    if r >= r0:
        raise ParamOutOfRange(
            f"ball radius {r} must lie below the comparability radius {r0:.6g}"
        )
    dist = float(np.linalg.norm(x1 - x2))
    M = max(1.0, dist / r)
    cap = 1.0 / r - 0.5
    if M > cap:
        raise CapViolated(
            f"separation multiple M = {M:.4g} exceeds the cap 1/r - 1/2 = "
            f"{cap:.4g}; the two balls are farther apart than one jump range"
        )
    if dist == 0.0:
        return 1.0, 0.0, M
    union = BallUnion((Ball(x1, r), Ball(x2, r)))
    b1 = simulate_exit_batch(params, union, x1, config, n)
    b2 = simulate_exit_batch(params, union, x2, config, n)
    kept = ~(b1.censored | b2.censored)
    if not kept.any():
        raise AllPathsCensored(f"all {n} path pairs were censored")
    h1 = target_contains(far_target, b1.positions[kept]).astype(float)
    h2 = target_contains(far_target, b2.positions[kept]).astype(float)
    m = h1.size
    m1 = float(h1.mean())
    m2 = float(h2.mean())
    if m2 == 0.0:
        raise InsufficientHits("no denominator paths reached the far target")
    ratio = m1 / m2
    if m > 1:
        v1 = float(h1.var(ddof=1))
        v2 = float(h2.var(ddof=1))
        c12 = float(np.cov(h1, h2, ddof=1)[0, 1])
        var_ratio = (v1 + ratio * ratio * v2 - 2.0 * ratio * c12) / (m * m2 * m2)
        stderr = math.sqrt(max(var_ratio, 0.0))
    else:
        stderr = 0.0
    return ratio, stderr, M

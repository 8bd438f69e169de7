"""Public simulation operations.

Single-path operations take an ``RngStream`` and consume it statefully (the
stream's counter advances past the draws used), so repeated calls give
independent paths.  Batch operations address path ``i`` by stream
``stream_base + i`` at counter 0 under a caller-supplied seed, which makes
batch results independent of chunking and worker count and lets a batch
reproduce any single path bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._philox import RngStream
from ..domains import DomainShape, contains, encode_shape
from ..errors import ParamOutOfRange, PointNotInterior, StepLimitExceeded
from ..kernels import constant_A, sphere_surface_area
from . import _engine
from .config import ExitRecord, OccupationGrid, SimConfig

__all__ = [
    "ExitBatch",
    "column_exit_weights",
    "jump_rate",
    "occupation_batch",
    "sample_stable_ball_exit",
    "sample_truncated_jump",
    "simulate_exit",
    "simulate_exit_batch",
    "simulate_occupation",
    "small_jump_std",
    "stable_ball_exit_batch",
    "walk_on_spheres_exit",
    "wos_exit_batch",
]

WOS_STEP_LIMIT = 100_000


def _check_epsilon(epsilon: float) -> None:
    if not (0.0 < epsilon < 1.0):
        raise ParamOutOfRange("epsilon must be in (0, 1)")


def jump_rate(params, epsilon: float) -> float:
    """Total intensity of simulated jumps: mass of the jump measure on
    ``[epsilon, 1)``, equal to ``A * omega * (epsilon**-alpha - 1) / alpha``.
    """
    _check_epsilon(epsilon)
    pref = constant_A(params) * sphere_surface_area(params.d) / params.alpha
    return pref * (epsilon**-params.alpha - 1.0)


def small_jump_std(params, epsilon: float) -> float:
    """Per-coordinate standard deviation of the sub-``epsilon`` jump mass.

    The Brownian substitute over a time step ``h`` uses per-coordinate
    variance ``small_jump_std(params, epsilon)**2 * h``; the jump measure is
    symmetric so no drift correction is needed.
    """
    _check_epsilon(epsilon)
    d, alpha = params.d, params.alpha
    var = (
        constant_A(params)
        * sphere_surface_area(d)
        * epsilon ** (2.0 - alpha)
        / (d * (2.0 - alpha))
    )
    return math.sqrt(var)


def sample_truncated_jump(params, epsilon: float, rng: RngStream) -> np.ndarray:
    """One jump vector: radius by inverse CDF on ``[epsilon, 1)``, uniform
    direction.  Mirrors the compiled engine's draw layout exactly.
    """
    _check_epsilon(epsilon)
    d, alpha = params.d, params.alpha
    u = rng.uniforms(1)[0]
    ena = epsilon**-alpha
    radius = (ena - u * (ena - 1.0)) ** (-1.0 / alpha)
    vec = rng.normals(d)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        norm = 1.0
    return radius * vec / norm


@dataclass(frozen=True)
class ExitBatch:
    """Arrays over a batch of paths (index = stream offset)."""

    positions: np.ndarray
    times: np.ndarray
    by_jump: np.ndarray
    last_interior: np.ndarray
    censored: np.ndarray
    counters: np.ndarray

    @property
    def n(self) -> int:
        return len(self.times)

    def censored_fraction(self) -> float:
        return float(self.censored.mean())


def _prepare(params, domain: DomainShape, start) -> tuple:
    start = np.ascontiguousarray(start, dtype=float)
    if start.shape != (params.d,) or domain.dim != params.d:
        raise ParamOutOfRange("start, domain, and params must agree on d")
    if not contains(domain, start):
        raise PointNotInterior("start must lie inside the domain")
    kind, data, cap = encode_shape(domain)
    return start, kind, np.ascontiguousarray(data), np.ascontiguousarray(cap)


def _run(
    params,
    domain: DomainShape,
    start,
    config: SimConfig,
    n: int,
    seed: int,
    stream_base: int,
    ctr0: int,
    grid: OccupationGrid | None,
    occ_sq: np.ndarray | None = None,
):
    start, kind, data, cap = _prepare(params, domain, start)
    d = params.d
    lam = jump_rate(params, config.epsilon)
    sigma = small_jump_std(params, config.epsilon)
    ena = config.epsilon**-params.alpha
    if grid is None:
        occ_low = np.zeros(1)
        occ_width = np.ones(1)
        occ_cells = np.ones(1, dtype=np.int64)
        occ_times = np.zeros(1)
        occ_sq = np.zeros(1)
    else:
        if grid.dim != d:
            raise ParamOutOfRange("occupation grid dimension mismatch")
        occ_low = np.ascontiguousarray(grid.low)
        occ_width = np.ascontiguousarray(grid.widths)
        occ_cells = np.array(grid.cells, dtype=np.int64)
        occ_times = grid.times
        if occ_sq is None:
            occ_sq = np.zeros_like(occ_times)
    out_pos = np.empty((n, d))
    out_time = np.empty(n)
    out_jump = np.zeros(n, dtype=np.bool_)
    out_last = np.empty((n, d))
    out_cens = np.zeros(n, dtype=np.bool_)
    out_ctr = np.zeros(n, dtype=np.uint64)
    _engine._run_paths(
        np.uint64(seed),
        int(stream_base),
        int(ctr0),
        n,
        params.alpha,
        start,
        kind,
        data,
        cap,
        lam,
        ena,
        sigma,
        config.time_step,
        config.max_time,
        config.boundary_refine,
        config.gaussian_compensation,
        grid is not None,
        occ_low,
        occ_width,
        occ_cells,
        occ_times,
        occ_sq,
        out_pos,
        out_time,
        out_jump,
        out_last,
        out_cens,
        out_ctr,
    )
    return ExitBatch(out_pos, out_time, out_jump, out_last, out_cens, out_ctr)


def simulate_exit_batch(
    params,
    domain: DomainShape,
    start,
    config: SimConfig,
    n: int,
    stream_base: int = 0,
) -> ExitBatch:
    """Simulate ``n`` paths to exit under ``config.seed``; path ``i`` owns
    stream ``stream_base + i``.
    """
    if n < 1:
        raise ParamOutOfRange("need n >= 1 paths")
    return _run(params, domain, start, config, n, config.seed, stream_base, 0, None)


def simulate_exit(
    params, domain: DomainShape, start, config: SimConfig, rng: RngStream
) -> ExitRecord:
    """One path of the truncated process to domain exit (or censoring).

    Uses the stream's ``(seed, stream_id)`` and advances its counter, so
    consecutive calls on one stream yield independent paths; the same path
    is reproduced by a batch at ``seed = rng.seed``,
    ``stream_base = rng.stream_id`` when the counter starts at 0.
    """
    batch = _run(
        params, domain, start, config, 1, rng.seed, rng.stream_id, rng.counter, None
    )
    rng.counter = int(batch.counters[0])
    return ExitRecord(
        exit_position=batch.positions[0].copy(),
        exit_time=float(batch.times[0]),
        by_jump=bool(batch.by_jump[0]),
        last_interior=batch.last_interior[0].copy(),
        censored=bool(batch.censored[0]),
    )


def occupation_batch(
    params,
    domain: DomainShape,
    start,
    grid: OccupationGrid,
    config: SimConfig,
    n: int,
    stream_base: int = 0,
    occ_sq: np.ndarray | None = None,
) -> tuple[OccupationGrid, ExitBatch]:
    """Simulate ``n`` paths while accumulating occupation time into ``grid``
    (mutated in place and returned with the per-path exit arrays).

    Censored paths contribute no occupation; ``grid`` totals cover exactly
    the non-censored paths of the batch.  When ``occ_sq`` (flat array of
    ``grid.times`` shape) is supplied it receives the per-cell sums of
    squared per-path occupation times, from which per-cell standard errors
    can be formed.
    """
    if n < 1:
        raise ParamOutOfRange("need n >= 1 paths")
    batch = _run(
        params, domain, start, config, n, config.seed, stream_base, 0, grid, occ_sq
    )
    return grid, batch


def simulate_occupation(
    params,
    domain: DomainShape,
    start,
    grid: OccupationGrid,
    config: SimConfig,
    rng: RngStream,
) -> OccupationGrid:
    """One path accumulating its occupation time into ``grid`` per cell.

    A censored path (no exit before ``config.max_time``) adds nothing.
    """
    batch = _run(
        params, domain, start, config, 1, rng.seed, rng.stream_id, rng.counter, grid
    )
    rng.counter = int(batch.counters[0])
    return grid


def column_exit_weights(
    params,
    domain: DomainShape,
    start,
    tops,
    half_width: float,
    config: SimConfig,
    n: int,
    stream_base: int = 0,
) -> tuple[np.ndarray, ExitBatch]:
    """Per-path unbiased estimates of the probability of exiting into each
    half-infinite column ``{|z1| <= half_width, z2 <= top}``, planar only.

    Instead of counting exit positions inside a column (hopeless when the
    exit probability is far below ``1/n``), each path accumulates the time
    integral of the jump intensity into the column along its trajectory —
    the expected number of jumps into the column, conditional on the path.
    When every column is outside the domain and farther from every domain
    point than ``config.epsilon``, a jump into a column ends the path, so
    that expected count equals the exit probability and every path passing
    within unit distance of a column top contributes a positive weight.
    The sampled paths themselves are unchanged: the returned batch is
    bit-identical to ``simulate_exit_batch`` at the same arguments.

    ``tops`` must be strictly decreasing (columns ordered top-down).
    Returns ``(weights, batch)`` with ``weights[i, k]`` the estimate from
    path ``i`` for column ``k``; average over non-censored paths to form
    the probability estimate.
    """
    if params.d != 2:
        raise ParamOutOfRange("column exit weights are implemented for d = 2 only")
    if n < 1:
        raise ParamOutOfRange("need n >= 1 paths")
    tops = np.ascontiguousarray(tops, dtype=float)
    if tops.ndim != 1 or tops.size == 0:
        raise ParamOutOfRange("tops must be a non-empty 1-d sequence")
    if tops.size > 1 and not np.all(np.diff(tops) < 0.0):
        raise ParamOutOfRange("tops must be strictly decreasing")
    if not (half_width > 0.0):
        raise ParamOutOfRange("half_width must be positive")
    start, kind, data, cap = _prepare(params, domain, start)
    lam = jump_rate(params, config.epsilon)
    sigma = small_jump_std(params, config.epsilon)
    ena = config.epsilon**-params.alpha
    nodes_b, weights_b = np.polynomial.legendre.leggauss(24)
    nodes_t, weights_t = np.polynomial.legendre.leggauss(12)
    closed = abs(params.alpha - 1.0) < 1e-12
    out_w = np.empty((n, tops.size))
    out_pos = np.empty((n, 2))
    out_time = np.empty(n)
    out_jump = np.zeros(n, dtype=np.bool_)
    out_last = np.empty((n, 2))
    out_cens = np.zeros(n, dtype=np.bool_)
    out_ctr = np.zeros(n, dtype=np.uint64)
    _engine._run_paths_cn(
        np.uint64(config.seed),
        int(stream_base),
        0,
        n,
        params.alpha,
        start,
        kind,
        data,
        cap,
        lam,
        ena,
        sigma,
        config.time_step,
        config.max_time,
        config.boundary_refine,
        config.gaussian_compensation,
        tops,
        float(half_width),
        constant_A(params),
        (params.d + params.alpha) / 2.0,
        closed,
        nodes_b,
        weights_b,
        nodes_t,
        weights_t,
        out_w,
        out_pos,
        out_time,
        out_jump,
        out_last,
        out_cens,
        out_ctr,
    )
    batch = ExitBatch(out_pos, out_time, out_jump, out_last, out_cens, out_ctr)
    return out_w, batch


def stable_ball_exit_batch(
    params, center, radius: float, x, n: int, seed: int, stream_base: int = 0
) -> np.ndarray:
    """``n`` exact exit positions of the untruncated stable process from
    ``B(center, radius)`` started at ``x``; rows indexed by stream offset.
    """
    center = np.ascontiguousarray(center, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    if center.shape != (params.d,) or x.shape != (params.d,):
        raise ParamOutOfRange("center and x must be d-vectors")
    if not (radius > 0.0):
        raise ParamOutOfRange("radius must be positive")
    if float(np.linalg.norm(x - center)) >= radius:
        raise PointNotInterior("start must lie inside the ball")
    out = np.empty((n, params.d))
    out_ctr = np.zeros(n, dtype=np.uint64)
    _engine._ball_exit_batch(
        np.uint64(seed),
        int(stream_base),
        0,
        n,
        params.alpha,
        center,
        radius,
        x,
        out,
        out_ctr,
    )
    return out


def sample_stable_ball_exit(params, center, radius: float, x, rng: RngStream):
    """One exact exit position of the untruncated stable process from a ball.

    Exactness: the radial law of the exit norm is a closed-form transform of
    a Beta(alpha/2, 1 - alpha/2) variate and the angular law given the norm
    is sampled by rejection — no discretization or spline tolerance enters.
    """
    center = np.ascontiguousarray(center, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    if center.shape != (params.d,) or x.shape != (params.d,):
        raise ParamOutOfRange("center and x must be d-vectors")
    if not (radius > 0.0):
        raise ParamOutOfRange("radius must be positive")
    if float(np.linalg.norm(x - center)) >= radius:
        raise PointNotInterior("start must lie inside the ball")
    out = np.empty((1, params.d))
    out_ctr = np.zeros(1, dtype=np.uint64)
    _engine._ball_exit_batch(
        np.uint64(rng.seed),
        int(rng.stream_id),
        int(rng.counter),
        1,
        params.alpha,
        center,
        radius,
        x,
        out,
        out_ctr,
    )
    rng.counter = int(out_ctr[0])
    return out[0]


def wos_exit_batch(
    params,
    domain: DomainShape,
    start,
    n: int,
    seed: int,
    stream_base: int = 0,
    step_limit: int = WOS_STEP_LIMIT,
) -> np.ndarray:
    """``n`` exact exit positions of the untruncated process from ``domain``
    by walk-on-spheres (iterated inscribed-ball exits).
    """
    start, kind, data, cap = _prepare(params, domain, start)
    out = np.empty((n, params.d))
    out_steps = np.zeros(n, dtype=np.int64)
    out_ctr = np.zeros(n, dtype=np.uint64)
    _engine._wos_batch(
        np.uint64(seed),
        int(stream_base),
        0,
        n,
        params.alpha,
        start,
        kind,
        data,
        cap,
        int(step_limit),
        out,
        out_steps,
        out_ctr,
    )
    if np.any(out_steps < 0):
        bad = int(np.argmax(out_steps < 0))
        raise StepLimitExceeded(
            f"walk-on-spheres path {bad} exceeded {step_limit} iterations"
        )
    return out


def walk_on_spheres_exit(
    params,
    domain: DomainShape,
    start,
    rng: RngStream,
    step_limit: int = WOS_STEP_LIMIT,
) -> np.ndarray:
    """One exact exit position of the untruncated process from ``domain``."""
    start, kind, data, cap = _prepare(params, domain, start)
    out = np.empty((1, params.d))
    out_steps = np.zeros(1, dtype=np.int64)
    out_ctr = np.zeros(1, dtype=np.uint64)
    _engine._wos_batch(
        np.uint64(rng.seed),
        int(rng.stream_id),
        int(rng.counter),
        1,
        params.alpha,
        start,
        kind,
        data,
        cap,
        int(step_limit),
        out,
        out_steps,
        out_ctr,
    )
    rng.counter = int(out_ctr[0])
    if out_steps[0] < 0:
        raise StepLimitExceeded(
            f"walk-on-spheres exceeded {step_limit} iterations"
        )
    return out[0]

"""The registered experiments: scenario in, report out.

Each experiment turns Monte Carlo estimates into named checks following two
fixed conventions:

* Unknown mathematical constants are never assumed: they are fitted once at
  the coarsest scale of a sweep (with a 3-standard-error slack in the
  conservative direction) and the fitted value must then bracket the
  estimates at the finer scales.  Scale uniformity is the testable content.
* Tolerances combine a statistical band (3 standard errors unless stated)
  with a fixed discretization margin ``DELTA_DISC = 0.1`` on ratio checks;
  the two enter the check records separately (band folded into ``lhs``,
  margin in ``tolerance``).

Checks record both compared numbers and the verdict; the comparison
direction is stated in each record's detail text.
"""

from __future__ import annotations

import math
import time
from typing import Callable, List, Sequence

import numpy as np
from scipy import special

from .. import __version__
from ..domains import (
    Annulus,
    AxisBox,
    Ball,
    BallUnion,
    BoxMinusSlab,
    HalfspaceIntersection,
    Intersection,
    contains,
    dn_set,
)
from ..errors import (
    CapViolated,
    ConfigError,
    InsufficientHits,
    NoBoundaryPoint,
    ParamOutOfRange,
    RadiusTooLarge,
)
from ..estimators import (
    MCEstimate,
    annulus_target,
    column_exit_estimates,
    exit_density_histogram,
    green_density,
    harnack_ratio_profile,
    shape_target,
)
from ..kernels import compute_r0, green_ball_array, sphere_surface_area
from ..simulator import OccupationGrid, SimConfig, simulate_exit_batch
from .report import (
    CheckRecord,
    EstimateRecord,
    Report,
    check_eq,
    check_ge,
    check_le,
)
from .scenario import Scenario, experiment_knobs

__all__ = [
    "DELTA_DISC",
    "EXPERIMENTS",
    "boundary_ratio_collapse",
    "boundary_ratio_convex",
    "exit_kernel_bounds",
    "exit_time_bound",
    "green_ball_sandwich",
    "harnack_ratio",
    "run_experiment",
]

#: Fixed discretization margin applied to ratio checks on top of the
#: statistical band.
DELTA_DISC = 0.1


# --------------------------------------------------------------------------
# shared helpers
# --------------------------------------------------------------------------


def _finish(
    scenario: Scenario,
    seed: int,
    checks: Sequence[CheckRecord],
    estimates: Sequence[EstimateRecord],
    t0: float,
) -> Report:
    return Report(
        scenario=scenario.raw,
        seed=int(seed),
        version=__version__,
        checks=tuple(checks),
        estimates=tuple(estimates),
        wall_time=time.perf_counter() - t0,
    )


def _record(label: str, est: MCEstimate) -> EstimateRecord:
    return EstimateRecord(label, est.mean, est.stderr, est.n, est.censored_fraction)


def _rel_se(est: MCEstimate) -> float:
    return est.stderr / est.mean if est.mean > 0.0 else math.inf


def _ratio_of_means(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    """``mean(num)/mean(den)`` with the paired delta-method standard error.

    The arrays index the same paths, so the same-index covariance is
    subtracted; with positively correlated samples this is strictly tighter
    than the independent formula.
    """
    m = num.size
    nbar = float(num.mean())
    dbar = float(den.mean())
    if dbar == 0.0:
        raise InsufficientHits("denominator mean is zero")
    ratio = nbar / dbar
    if m < 2:
        return ratio, 0.0
    vn = float(num.var(ddof=1))
    vd = float(den.var(ddof=1))
    cov = float(np.cov(num, den, ddof=1)[0, 1])
    var = (vn + ratio * ratio * vd - 2.0 * ratio * cov) / (m * dbar * dbar)
    return ratio, math.sqrt(max(var, 0.0))


def _kept_arrays(batch) -> tuple[np.ndarray, np.ndarray]:
    kept = ~batch.censored
    if not kept.any():
        raise InsufficientHits("all paths censored")
    return batch.positions[kept], batch.times[kept]


# --------------------------------------------------------------------------
# occupation-density sandwich on a small ball
# --------------------------------------------------------------------------


def _green_cell_oracle(params, center, radius, grid: OccupationGrid, mask) -> np.ndarray:
    """Cell averages of the closed-form ball Green density from the center,
    via 5x5 midpoint subsampling of each qualifying cell."""
    centers = grid.cell_centers()[mask]
    w = grid.widths
    sub = (np.arange(5) + 0.5) / 5.0 - 0.5
    offs = np.stack(np.meshgrid(sub * w[0], sub * w[1], indexing="ij"), -1).reshape(-1, 2)
    out = np.empty(centers.shape[0])
    x = np.asarray(center, dtype=float)
    for i, c in enumerate(centers):
        ys = c[None, :] + offs
        out[i] = float(green_ball_array(params, center, radius, x, ys).mean())
    return out


def _green_chunked(params, domain, center, grid, n, config, chunks, oracle_mask, oracle):
    """Chunked occupation-density run: combined per-cell ratios with their
    standard errors, plus the aggregate ratio with a chunk-spread error."""
    per_chunk = n // chunks
    cell_means = np.zeros(oracle.size)
    cell_vars = np.zeros(oracle.size)
    agg = np.empty(chunks)
    cens = 0.0
    for c in range(chunks):
        est = green_density(
            params, domain, center, grid, per_chunk, config,
            stream_base=c * per_chunk,
        )
        means = est.means[oracle_mask]
        ses = est.stderrs[oracle_mask]
        cell_means += means
        cell_vars += ses * ses
        agg[c] = float((means / oracle).mean())
        cens += est.censored_fraction
    cell_means /= chunks
    cell_ses = np.sqrt(cell_vars) / chunks
    ratios = cell_means / oracle
    ratio_ses = cell_ses / oracle
    agg_mean = float(agg.mean())
    agg_se = float(agg.std(ddof=1) / math.sqrt(chunks))
    return ratios, ratio_ses, agg_mean, agg_se, cens / chunks


def green_ball_sandwich(scenario: Scenario, seed: int = 0) -> Report:
    """Occupation density vs the closed-form ball Green function.

    Qualifying cells (at least two cell widths from both the source and the
    sphere) must satisfy ``oracle <= estimate <= upper_constant * oracle``
    up to 3 SE and the discretization margin, and the aggregate cell ratio
    must be stable under halving the jump cutoff and the time step
    (refinement gates, 2 pooled SE).
    """
    t0 = time.perf_counter()
    params = scenario.params
    if not isinstance(scenario.domain, Ball):
        raise ConfigError("green_ball_sandwich requires a ball domain")
    ball: Ball = scenario.domain
    r = ball.radius
    r0 = compute_r0(params)
    if r >= r0:
        raise RadiusTooLarge(
            f"ball radius {r} must be below the comparison radius {r0:.6g}"
        )
    knobs = experiment_knobs(
        scenario,
        (),
        {"grid_cells": 11, "upper_constant": 2.0, "gate_paths": 0, "chunks": 16},
    )
    k = int(knobs["grid_cells"])
    upper = float(knobs["upper_constant"])
    chunks = int(knobs["chunks"])
    gate_n = int(knobs["gate_paths"]) or max(scenario.n // 4, chunks)
    center = ball.center
    grid = OccupationGrid(center - r, center + r, (k, k))
    w = float(grid.widths[0])
    dist = np.linalg.norm(grid.cell_centers() - center, axis=1)
    mask = (dist >= 2.0 * w) & (r - dist >= 2.0 * w)
    if not mask.any():
        raise ConfigError("no qualifying cells; increase grid_cells")
    oracle = _green_cell_oracle(params, center, r, grid, mask)

    base = _green_chunked(
        params, ball, center, grid, scenario.n, scenario.sim_config(seed),
        chunks, mask, oracle,
    )
    ratios, ses, agg, agg_se, cens = base
    lower_lhs = float((ratios + 3.0 * ses).min())
    upper_lhs = float((ratios - 3.0 * ses).max())
    checks = [
        check_ge(
            "green-cell-lower",
            "min over qualifying cells of (ratio + 3 SE) >= 1 - margin",
            lower_lhs,
            1.0,
            DELTA_DISC,
        ),
        check_le(
            "green-cell-upper",
            f"max over qualifying cells of (ratio - 3 SE) <= {upper} + margin",
            upper_lhs,
            upper,
            DELTA_DISC,
        ),
    ]
    estimates = [
        EstimateRecord("cell-ratio-aggregate", agg, agg_se, scenario.n, cens),
        EstimateRecord("cell-ratio-min", float(ratios.min()), float(ses[ratios.argmin()]), scenario.n, cens),
        EstimateRecord("cell-ratio-max", float(ratios.max()), float(ses[ratios.argmax()]), scenario.n, cens),
    ]

    gates = (
        ("refinement-gate-jump-cutoff", {"epsilon": scenario.epsilon / 2.0}),
        ("refinement-gate-time-step", {"time_step": scenario.time_step / 2.0}),
    )
    for check_id, overrides in gates:
        _, _, agg_g, agg_g_se, cens_g = _green_chunked(
            params, ball, center, grid, gate_n,
            scenario.sim_config(seed, **overrides), chunks, mask, oracle,
        )
        pooled = math.sqrt(agg_se * agg_se + agg_g_se * agg_g_se)
        checks.append(
            check_le(
                check_id,
                "aggregate cell ratio moves < 2 pooled SE when the knob halves",
                abs(agg_g - agg),
                2.0 * pooled,
            )
        )
        estimates.append(
            EstimateRecord(check_id + "-aggregate", agg_g, agg_g_se, gate_n, cens_g)
        )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# exit-position density bounds on small balls
# --------------------------------------------------------------------------


def _stable_tail(params, r: float, rho: float) -> float:
    """P(|exit| >= rho) for the untruncated process leaving B(0, r) from the
    center: closed-form regularized incomplete beta of the radial law."""
    if rho <= r:
        return 1.0
    a = 0.5 * params.alpha
    return float(special.betainc(a, 1.0 - a, (r / rho) ** 2))


def _shell_volume(params, a: float, b: float) -> float:
    d = params.d
    return sphere_surface_area(d) / d * (b**d - a**d)


def exit_kernel_bounds(scenario: Scenario, seed: int = 0) -> Report:
    """Exit-position density of small-ball exits, in three zones.

    Inside the unit reach (annulus from the ball to distance ``1 - r``) the
    density must sit between one and two times the closed-form stable exit
    law; on the outer shell (``1 - r`` to ``1 + r/2``) the density divided
    by ``r**alpha`` must be bounded above and below by a single constant
    fitted at the largest radius; beyond distance ``1 + r`` nothing may
    land at all.
    """
    t0 = time.perf_counter()
    params = scenario.params
    if not isinstance(scenario.domain, Ball):
        raise ConfigError("exit_kernel_bounds requires a ball domain")
    knobs = experiment_knobs(scenario, ("radii",))
    radii = [float(v) for v in knobs["radii"]]
    if len(radii) < 2 or any(
        radii[i] <= radii[i + 1] for i in range(len(radii) - 1)
    ):
        raise ConfigError("experiment.radii must be a decreasing list, length >= 2")
    if abs(radii[0] - scenario.domain.radius) > 1e-12:
        raise ConfigError("domain ball radius must equal experiment.radii[0]")
    r0 = compute_r0(params)
    if radii[0] >= min(0.25, r0):
        raise RadiusTooLarge(
            f"largest radius {radii[0]} must be below min(1/4, {r0:.6g})"
        )
    center = scenario.domain.center
    alpha = params.alpha
    config = scenario.sim_config(seed)

    inner_lo: List[float] = []
    inner_hi: List[float] = []
    norm_by_radius: List[tuple[list[float], list[float]]] = []
    beyond_counts = 0
    checks: List[CheckRecord] = []
    estimates: List[EstimateRecord] = []
    for r in radii:
        inner_edges = [r, 2.0 * r, 4.0 * r, 1.0 - r]
        shell_edges = [1.0 - r, 1.0, 1.0 + r / 4.0, 1.0 + r / 2.0]
        cells = [
            annulus_target(center, a, b)
            for a, b in zip(inner_edges[:-1], inner_edges[1:])
        ] + [
            annulus_target(center, a, b)
            for a, b in zip(shell_edges[:-1], shell_edges[1:])
        ]
        beyond = annulus_target(center, 1.0 + r, 2.0 + r)
        ests = exit_density_histogram(
            params, Ball(center, r), center, cells + [beyond], scenario.n, config
        )
        # inner zone: ratio against the closed-form stable cell mass
        for (a, b), est in zip(zip(inner_edges[:-1], inner_edges[1:]), ests[:3]):
            mass = _stable_tail(params, r, a) - _stable_tail(params, r, b)
            vol = _shell_volume(params, a, b)
            ratio = est.mean * vol / mass
            se = est.stderr * vol / mass
            inner_lo.append(ratio + 3.0 * se)
            inner_hi.append(ratio - 3.0 * se)
            estimates.append(
                EstimateRecord(
                    f"inner-ratio-r{r:g}-[{a:g},{b:g})", ratio, se, est.n,
                    est.censored_fraction,
                )
            )
        # shell zone: density normalized by r^alpha
        lo_list: list[float] = []
        hi_list: list[float] = []
        for (a, b), est in zip(zip(shell_edges[:-1], shell_edges[1:]), ests[3:6]):
            norm = est.mean / r**alpha
            se = est.stderr / r**alpha
            lo_list.append(norm + 3.0 * se)
            hi_list.append(norm - 3.0 * se)
            estimates.append(
                EstimateRecord(
                    f"shell-norm-r{r:g}-[{a:g},{b:g})", norm, se, est.n,
                    est.censored_fraction,
                )
            )
        norm_by_radius.append((lo_list, hi_list))
        beyond_est = ests[6]
        vol = _shell_volume(params, 1.0 + r, 2.0 + r)
        beyond_counts += int(round(beyond_est.mean * vol * beyond_est.n))

    checks.append(
        check_ge(
            "exit-mass-lower",
            "min inner-cell ratio (+3 SE) against the stable cell mass >= 1 - margin",
            min(inner_lo),
            1.0,
            DELTA_DISC,
        )
    )
    checks.append(
        check_le(
            "exit-mass-upper",
            "max inner-cell ratio (-3 SE) against the stable cell mass <= 2 + margin",
            max(inner_hi),
            2.0,
            DELTA_DISC,
        )
    )
    # fit the two-sided shell constant at the largest radius, reuse below
    fit_lo, fit_hi = norm_by_radius[0]
    c_fit = max(max(fit_lo), 1.0 / max(min(fit_hi), 1e-300))
    rest_hi = max(hi for lo, hi in norm_by_radius[1:] for hi in hi)
    rest_lo = min(lo for lo, hi in norm_by_radius[1:] for lo in lo)
    checks.append(
        check_le(
            "shell-mass-upper",
            "shell density / r^alpha at finer radii (-3 SE) <= constant fitted "
            "at the largest radius (margin multiplicative)",
            rest_hi,
            c_fit,
            DELTA_DISC * c_fit,
        )
    )
    checks.append(
        check_ge(
            "shell-mass-lower",
            "shell density / r^alpha at finer radii (+3 SE) >= 1 / fitted "
            "constant (margin multiplicative)",
            rest_lo,
            1.0 / c_fit,
            DELTA_DISC / c_fit,
        )
    )
    checks.append(
        check_le(
            "beyond-range-zero",
            "total exits landing beyond distance 1 + r, all radii",
            float(beyond_counts),
            0.0,
        )
    )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# two-ball Harnack ratios
# --------------------------------------------------------------------------


def harnack_ratio(scenario: Scenario, seed: int = 0) -> Report:
    """Interior Harnack ratios across center separations, with the cap.

    The ratio of hit probabilities from the two centers of a two-ball union
    must stay inside the ``M**(d+alpha)`` envelope around the constant
    fitted at ``M = 1``; pushing the separation past ``1/r - 1/2`` must
    raise the hard cap error; and past the jump range the far center's hit
    probability must be exactly zero while the near center still hits.
    """
    t0 = time.perf_counter()
    params = scenario.params
    if not isinstance(scenario.domain, Ball):
        raise ConfigError("harnack_ratio requires a ball domain (the first ball)")
    r = scenario.domain.radius
    x1 = scenario.domain.center
    knobs = experiment_knobs(
        scenario,
        ("m_values",),
        {
            "target_center": [-0.3, 0.0],
            "target_radius": 0.1,
            "control_radius": 0.035,
            "control_factor": 1.1,
        },
    )
    m_values = [float(m) for m in knobs["m_values"]]
    if sorted(m_values) != m_values or m_values[0] != 1.0:
        raise ConfigError("experiment.m_values must be increasing and start at 1")
    tc = np.asarray(knobs["target_center"], dtype=float)
    tr = float(knobs["target_radius"])
    far_center = x1 + np.eye(1, params.d, 0).ravel() * (m_values[-1] * r)
    if float(np.linalg.norm(tc - x1)) <= r + tr:
        raise ConfigError("target must be disjoint from the sweep balls")
    if float(np.linalg.norm(tc - far_center)) - r - tr >= 1.0:
        raise ConfigError("target must be within one jump of every sweep center")
    target = shape_target(Ball(tc, tr))
    config = scenario.sim_config(seed)
    power = params.d + params.alpha

    checks: List[CheckRecord] = []
    estimates: List[EstimateRecord] = []

    ratio_id, se_id, m_id = harnack_ratio_profile(
        params, (x1, x1.copy()), r, target, max(2, scenario.n // 100), config
    )
    checks.append(
        check_eq(
            "harnack-identical-centers",
            "coincident centers give ratio exactly 1 with zero error",
            ratio_id,
            1.0,
        )
    )

    results: List[tuple[float, float, float]] = []
    for m in m_values:
        x2 = x1 + np.eye(1, params.d, 0).ravel() * (m * r)
        ratio, se, m_eff = harnack_ratio_profile(
            params, (x1, x2), r, target, scenario.n, config
        )
        results.append((m_eff, ratio, se))
        estimates.append(
            EstimateRecord(f"harnack-ratio-M{m:g}", ratio, se, scenario.n, 0.0)
        )
    m1, ratio1, se1 = results[0]
    rel1 = se1 / ratio1 if ratio1 > 0 else math.inf
    j_fit = max(ratio1, 1.0 / ratio1) * (1.0 + 3.0 * rel1)
    upper_lhs = max((ratio - 3.0 * se) / m_eff**power for m_eff, ratio, se in results[1:])
    lower_lhs = min((ratio + 3.0 * se) * m_eff**power for m_eff, ratio, se in results[1:])
    checks.append(
        check_le(
            "harnack-upper-envelope",
            "max over M > 1 of (ratio - 3 SE) / M^(d+alpha) <= constant fitted at M = 1",
            upper_lhs,
            j_fit,
        )
    )
    checks.append(
        check_ge(
            "harnack-lower-envelope",
            "min over M > 1 of (ratio + 3 SE) * M^(d+alpha) >= 1 / fitted constant",
            lower_lhs,
            1.0 / j_fit,
        )
    )

    cap = 1.0 / r - 0.5
    m_bad = 1.05 * cap
    try:
        harnack_ratio_profile(
            params,
            (x1, x1 + np.eye(1, params.d, 0).ravel() * (m_bad * r)),
            r,
            target,
            2,
            config,
        )
        cap_fired = False
    except CapViolated:
        cap_fired = True
    checks.append(
        CheckRecord(
            "harnack-cap-enforced",
            "separation multiples beyond 1/r - 1/2 must raise the hard cap error",
            m_bad,
            cap,
            0.0,
            cap_fired,
        )
    )

    rc = float(knobs["control_radius"])
    s = float(knobs["control_factor"]) * (1.0 / rc - 0.5) * rc
    x2c = x1 + np.eye(1, params.d, 0).ravel() * s
    if s - 2.0 * rc <= 1.0:
        raise ConfigError(
            "beyond-cap control is not genuine: ball gap "
            f"{s - 2.0 * rc:.4g} must exceed the unit jump range"
        )
    if float(np.linalg.norm(tc - x1)) - rc - tr >= 1.0:
        raise ConfigError("control target must be one jump from the near ball")
    if float(np.linalg.norm(tc - x2c)) - rc - tr <= 1.0:
        raise ConfigError("control target must be beyond one jump from the far ball")
    union = BallUnion((Ball(x1, rc), Ball(x2c, rc)))
    for check_id, start, op, comparison in (
        ("beyond-cap-source-reachable", x1, check_ge, ">= 1"),
        ("beyond-cap-target-unreachable", x2c, check_le, "== 0"),
    ):
        batch = simulate_exit_batch(params, union, start, config, scenario.n)
        pts, _ = _kept_arrays(batch)
        hits = int(np.count_nonzero(np.linalg.norm(pts - tc, axis=1) < tr))
        rhs = 1.0 if comparison == ">= 1" else 0.0
        checks.append(
            op(
                check_id,
                f"hit count of the far target from this center must be {comparison}",
                float(hits),
                rhs,
            )
        )
        estimates.append(
            EstimateRecord(check_id + "-hits", float(hits), 0.0, pts.shape[0], 0.0)
        )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# exit probability vs scaled mean exit time
# --------------------------------------------------------------------------


def exit_time_bound(scenario: Scenario, seed: int = 0) -> Report:
    """Exit-beyond-r probability against ``r**-alpha`` times the mean exit
    time, across dyadic scales, plus inner-ball hitting.

    The ratio of the two sides is estimated pathwise-paired on a grid of
    interior starts; its grid maximum must be positive, and at each halved
    scale it must stay within 3 pooled SE plus the discretization margin of
    the base-scale value (the margin absorbs the genuine O(r) finite-scale
    correction of the truncated process).  The hitting check fits its
    constant at the larger inner-ball fraction and requires the finer
    fraction to stay above it.
    """
    t0 = time.perf_counter()
    params = scenario.params
    if not isinstance(scenario.domain, AxisBox):
        raise ConfigError("exit_time_bound requires a box domain")
    box = scenario.domain
    if not (
        np.allclose(box.low, -box.high) and np.allclose(box.high, box.high[0])
    ):
        raise ConfigError("exit_time_bound requires a centered cube")
    knobs = experiment_knobs(
        scenario, (), {"scales": 3, "kappas": [0.5, 0.25]}
    )
    scales = int(knobs["scales"])
    kappas = [float(kv) for kv in knobs["kappas"]]
    if len(kappas) != 2 or kappas[1] >= kappas[0]:
        raise ConfigError("experiment.kappas must be two decreasing fractions")
    r1 = float(box.high[0]) * math.sqrt(2.0)
    if r1 >= 1.0:
        raise ParamOutOfRange("bounding radius must be below the jump range")
    alpha = params.alpha
    config = scenario.sim_config(seed)

    checks: List[CheckRecord] = []
    estimates: List[EstimateRecord] = []
    max_ratios: List[tuple[float, float]] = []
    min_ratio = math.inf
    all_finite = True
    for s in range(scales):
        r = r1 / 2.0**s
        dom = AxisBox(np.full(params.d, -r / math.sqrt(2.0)), np.full(params.d, r / math.sqrt(2.0)))
        grid = [np.zeros(params.d)]
        for axis in range(params.d):
            for sign in (-1.0, 1.0):
                p = np.zeros(params.d)
                p[axis] = sign * r / 4.0
                grid.append(p)
        best = (-math.inf, 0.0)
        for gi, x in enumerate(grid):
            batch = simulate_exit_batch(
                params, dom, x, config, scenario.n,
                stream_base=(s * 16 + gi) * scenario.n,
            )
            pts, times = _kept_arrays(batch)
            hits = (np.linalg.norm(pts, axis=1) >= r).astype(float)
            ratio, se = _ratio_of_means(hits, times * r**-alpha)
            if not math.isfinite(ratio):
                all_finite = False
            min_ratio = min(min_ratio, ratio)
            if ratio > best[0]:
                best = (ratio, se)
        max_ratios.append(best)
        estimates.append(
            EstimateRecord(f"max-exit-ratio-r{r:g}", best[0], best[1], scenario.n, 0.0)
        )
    checks.append(
        CheckRecord(
            "exit-ratio-positive",
            "every grid ratio of exit probability to scaled mean exit time is "
            "positive and finite",
            min_ratio,
            0.0,
            0.0,
            bool(all_finite and min_ratio > 0.0),
        )
    )
    base_ratio, base_se = max_ratios[0]
    worst = -math.inf
    for a, sa in max_ratios[1:]:
        pooled = math.sqrt(sa * sa + base_se * base_se)
        worst = max(worst, abs(a - base_ratio) - 3.0 * pooled)
    checks.append(
        check_le(
            "exit-ratio-scale-stable",
            "max over halved scales of (|max ratio - base-scale max ratio| - "
            "3 pooled SE) <= margin",
            worst,
            0.0,
            DELTA_DISC,
        )
    )

    values: List[tuple[float, float]] = []
    for ki, kappa in enumerate(kappas):
        inner = kappa * r1
        dom = Annulus(np.zeros(params.d), inner, r1)
        x = np.zeros(params.d)
        x[0] = 0.5 * (inner + r1)
        batch = simulate_exit_batch(
            params, dom, x, config, scenario.n,
            stream_base=(1000 + ki) * scenario.n,
        )
        pts, times = _kept_arrays(batch)
        hits = (np.linalg.norm(pts, axis=1) <= inner).astype(float)
        denom = times * (kappa**params.d * r1**-alpha)
        value, se = _ratio_of_means(hits, denom)
        values.append((value, se))
        estimates.append(
            EstimateRecord(
                f"hit-scaling-kappa{kappa:g}", value, se, scenario.n, 0.0
            )
        )
    (v0, s0), (v1, s1) = values
    c_fit = v0 * (1.0 - 3.0 * (s0 / v0 if v0 > 0 else math.inf))
    checks.append(
        check_ge(
            "hit-probability-scaling",
            "inner-ball hitting ratio at the finer fraction (+3 SE) >= constant "
            "fitted at the coarser fraction",
            v1 + 3.0 * s1,
            c_fit,
        )
    )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# boundary ratios near a convex boundary point
# --------------------------------------------------------------------------


def _polytope_boundary_frame(
    dom: HalfspaceIntersection, q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Inward normal and tangent at boundary point ``q`` (planar only);
    raises if ``q`` is not on the boundary within 1e-9."""
    slack = dom.offsets - dom.normals @ q
    if slack.min() < -1e-9 or slack.min() > 1e-9:
        raise NoBoundaryPoint(
            f"point {q.tolist()} is not on the domain boundary (slack "
            f"{slack.min():.3g})"
        )
    face = int(np.argmin(slack))
    inward = -dom.normals[face]
    tangent = np.array([-inward[1], inward[0]])
    return inward, tangent


def boundary_ratio_convex(scenario: Scenario, seed: int = 0) -> Report:
    """Ratio comparability of two boundary-vanishing hit probabilities near
    a convex boundary point.

    Both functions are hit probabilities of disjoint far half-plane targets
    (so they vanish outside the domain by construction).  Their ratio over
    a grid hugging the boundary point must oscillate by at most a constant
    fitted at the coarser scale, the same at half the scale; the same-target
    control must give ratio exactly 1; the ratio along the three grid rows
    approaching the boundary must be mutually consistent (3 pooled SE); and
    the anchor value must control the grid maximum (constant fitted at the
    coarser scale, reused at the finer one).
    """
    t0 = time.perf_counter()
    params = scenario.params
    if params.d != 2:
        raise ConfigError("boundary_ratio_convex is planar (d = 2)")
    if not isinstance(scenario.domain, HalfspaceIntersection):
        raise ConfigError("boundary_ratio_convex requires a polytope domain")
    dom = scenario.domain
    knobs = experiment_knobs(
        scenario,
        ("q", "lam", "r_big", "r"),
        {"far_low": -0.3, "far_high": 1.3},
    )
    q = np.asarray(knobs["q"], dtype=float)
    lam = float(knobs["lam"])
    r_big = float(knobs["r_big"])
    r = float(knobs["r"])
    if lam < 0.0 or r_big <= 0.0:
        raise ConfigError("need lam >= 0 and r_big > 0")
    r3 = min(compute_r0(params), r_big) / (6.0 * (3.0 + 2.0 * lam))
    if not (0.0 < r < r3):
        raise ParamOutOfRange(
            f"scale r = {r} must lie in (0, {r3:.6g}) for this domain"
        )
    inward, tangent = _polytope_boundary_frame(dom, q)
    far_low = float(knobs["far_low"])
    far_high = float(knobs["far_high"])
    config = scenario.sim_config(seed)
    offsets = (-0.5, 0.0, 0.5)
    heights = (0.125, 0.25, 0.5, 0.75)

    def run_scale(scale: float, base_stream: int):
        # the grid hugs Q inside the ball of radius scale/(1 + lam)
        eff = scale / (1.0 + lam)
        grid_pts = []
        for h_frac in heights:
            for o_frac in offsets:
                p = q + inward * (h_frac * eff) + tangent * (o_frac * eff)
                if not contains(dom, p):
                    raise ConfigError("grid point escapes the domain; shrink r")
                grid_pts.append(p)
        ratios = np.empty(len(grid_pts))
        ses = np.empty(len(grid_pts))
        u_means = np.empty(len(grid_pts))
        u_ses = np.empty(len(grid_pts))
        first_pair = None
        for i, p in enumerate(grid_pts):
            batch = simulate_exit_batch(
                params, dom, p, config, scenario.n,
                stream_base=(base_stream + i) * scenario.n,
            )
            pts, _ = _kept_arrays(batch)
            u = (pts[:, 0] <= far_low).astype(float)
            v = (pts[:, 0] >= far_high).astype(float)
            if v.mean() == 0.0:
                raise InsufficientHits("no far-target hits at a grid point")
            ratios[i], ses[i] = _ratio_of_means(u, v)
            u_means[i] = u.mean()
            u_ses[i] = u.std(ddof=1) / math.sqrt(u.size)
            if first_pair is None:
                first_pair = (u, u)
        anchor = q + inward * (eff / 2.0)
        batch = simulate_exit_batch(
            params, dom, anchor, config, scenario.n,
            stream_base=(base_stream + len(grid_pts)) * scenario.n,
        )
        pts, _ = _kept_arrays(batch)
        ua = (pts[:, 0] <= far_low).astype(float)
        return ratios, ses, u_means, u_ses, ua, first_pair

    ratios, ses, u_means, u_ses, ua, first_pair = run_scale(r, 0)
    i_max, i_min = int(ratios.argmax()), int(ratios.argmin())
    osc = ratios[i_max] / ratios[i_min]
    osc_rel = math.sqrt(
        (ses[i_max] / ratios[i_max]) ** 2 + (ses[i_min] / ratios[i_min]) ** 2
    )
    c_fit = osc * (1.0 + 3.0 * osc_rel)
    checks = [
        check_le(
            "boundary-ratio-oscillation",
            "grid max/min of the two-function ratio at scale r; the rhs is the "
            "constant fitted here and reused at r/2",
            float(osc),
            c_fit,
        )
    ]
    estimates = [
        EstimateRecord("ratio-oscillation-r", float(osc), float(osc * osc_rel), scenario.n, 0.0)
    ]

    ratios_h, ses_h, u_means_h, u_ses_h, ua_h, _ = run_scale(r / 2.0, 100)
    j_max, j_min = int(ratios_h.argmax()), int(ratios_h.argmin())
    osc_h = ratios_h[j_max] / ratios_h[j_min]
    osc_h_rel = math.sqrt(
        (ses_h[j_max] / ratios_h[j_max]) ** 2 + (ses_h[j_min] / ratios_h[j_min]) ** 2
    )
    checks.append(
        check_le(
            "boundary-ratio-scale-stable",
            "oscillation at r/2 (-3 SE) <= constant fitted at r",
            float(osc_h * (1.0 - 3.0 * osc_h_rel)),
            c_fit,
        )
    )
    estimates.append(
        EstimateRecord("ratio-oscillation-r/2", float(osc_h), float(osc_h * osc_h_rel), scenario.n, 0.0)
    )

    u_ctrl, v_ctrl = first_pair
    ratio_ctrl, _ = _ratio_of_means(u_ctrl, v_ctrl)
    checks.append(
        check_eq(
            "boundary-ratio-control-identity",
            "same-target control ratio is exactly 1",
            float(ratio_ctrl),
            1.0,
        )
    )

    # mean ratio per grid row (rows ordered boundary-inward), consecutive
    # rows must agree within 3 pooled SE
    n_off = len(offsets)
    worst = 0.0
    row_means = []
    for row in range(3):
        sl = slice(row * n_off, (row + 1) * n_off)
        row_means.append(
            (float(ratios[sl].mean()), float(np.sqrt((ses[sl] ** 2).sum()) / n_off))
        )
    for (a, sa), (b, sb) in zip(row_means[:-1], row_means[1:]):
        pooled = math.sqrt(sa * sa + sb * sb)
        worst = max(worst, abs(a - b) / pooled if pooled > 0 else math.inf)
    checks.append(
        check_le(
            "boundary-ratio-limit",
            "consecutive boundary-approaching rows of the ratio agree within 3 "
            "pooled SE",
            worst,
            3.0,
        )
    )

    def anchor_value(ua_arr, u_m, u_s):
        k = int(ua_arr.sum())
        mean_a = k / ua_arr.size
        se_a = ua_arr.std(ddof=1) / math.sqrt(ua_arr.size)
        i_best = int(u_m.argmax())
        val = mean_a / u_m[i_best]
        rel = math.sqrt(
            (se_a / mean_a) ** 2 + (u_s[i_best] / u_m[i_best]) ** 2
        ) if mean_a > 0 else math.inf
        return val, rel

    val_r, rel_r = anchor_value(ua, u_means, u_ses)
    val_h, rel_h = anchor_value(ua_h, u_means_h, u_ses_h)
    c_anchor = val_r * (1.0 - 3.0 * rel_r)
    checks.append(
        check_ge(
            "carleson-anchor-lower",
            "anchor-to-grid-max value at r/2 (+3 SE) >= constant fitted at r",
            float(val_h * (1.0 + 3.0 * rel_h)),
            c_anchor,
        )
    )
    estimates.append(
        EstimateRecord("anchor-to-max-r", float(val_r), float(val_r * rel_r), scenario.n, 0.0)
    )
    estimates.append(
        EstimateRecord("anchor-to-max-r/2", float(val_h), float(val_h * rel_h), scenario.n, 0.0)
    )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# the anchored-ratio collapse (falsification experiment)
# --------------------------------------------------------------------------


def boundary_ratio_collapse(scenario: Scenario, seed: int = 0) -> Report:
    """Demonstrates that no anchor constant controls deep-column exit
    probabilities on the slab domain.

    For a family of ever-shallower columns, the ratio of the anchor value
    to the grid supremum must be nonincreasing (2 pooled SE) and must drop
    below a quarter of its first value, killing any uniform anchor bound.
    The grid supremum must localize in the layer within unit reach of the
    column for every depth index.
    """
    t0 = time.perf_counter()
    params = scenario.params
    if params.d != 2:
        raise ConfigError("boundary_ratio_collapse is planar (d = 2)")
    knobs = experiment_knobs(
        scenario,
        ("r1", "m1", "n_values"),
        {
            "grid_lateral": [-0.05, 0.0, 0.05],
            "grid_heights": [1e-4, 1e-3, 5e-3, 0.02, 0.1],
            "grid_paths": 0,
            "min_positive_paths": 100,
            "max_doublings": 2,
        },
    )
    r1 = float(knobs["r1"])
    m1 = float(knobs["m1"])
    if not (0.0 < r1 and m1 > 1.0 and m1 * r1 < 0.5):
        raise ConfigError("need r1 > 0, m1 > 1, and m1 * r1 < 1/2")
    n_values = [int(v) for v in knobs["n_values"]]
    if sorted(n_values) != n_values or len(n_values) < 2 or n_values[0] < 1:
        raise ConfigError("experiment.n_values must be increasing positive integers")
    if (
        not isinstance(scenario.domain, Intersection)
        or not isinstance(scenario.domain.shape, BoxMinusSlab)
        or not isinstance(scenario.domain.ball, Ball)
    ):
        raise ConfigError(
            "boundary_ratio_collapse requires the slab domain intersected "
            "with a ball"
        )
    if abs(scenario.domain.ball.radius - m1 * r1) > 1e-12 or np.any(
        scenario.domain.ball.center != 0.0
    ):
        raise ConfigError("domain ball must be centered at 0 with radius m1 * r1")
    domain = scenario.domain
    anchor = np.array([0.0, r1 / 2.0])
    if not contains(domain, anchor):
        raise ConfigError("anchor point (0, r1/2) must lie inside the domain")
    tops = [-1.0 + 2.0**-nv * r1 * r1 for nv in n_values]
    half_width = r1 / 8.0
    grid_paths = int(knobs["grid_paths"]) or max(scenario.n // 3, 2)
    min_pos = int(knobs["min_positive_paths"])
    config = scenario.sim_config(seed)

    n_anchor = scenario.n
    doublings = 0
    while True:
        a_ests, a_pos = column_exit_estimates(
            params, domain, anchor, tops, half_width, n_anchor, config
        )
        if int(a_pos.min()) >= min_pos or doublings >= int(knobs["max_doublings"]):
            break
        n_anchor *= 2
        doublings += 1

    grid_pts = [
        np.array([gx, gy])
        for gy in knobs["grid_heights"]
        for gx in knobs["grid_lateral"]
    ]
    for p in grid_pts:
        if not contains(domain, p):
            raise ConfigError(f"grid point {p.tolist()} is outside the domain")
    per_point: List[tuple] = []
    for gi, p in enumerate(grid_pts):
        g_ests, _ = column_exit_estimates(
            params, domain, p, tops, half_width, grid_paths, config,
            stream_base=(gi + 1) * grid_paths,
        )
        per_point.append(g_ests)

    checks: List[CheckRecord] = []
    estimates: List[EstimateRecord] = []
    ratios: List[tuple[float, float]] = []
    mislocated = 0
    for idx, nv in enumerate(n_values):
        means = np.array([ests[idx].mean for ests in per_point])
        i_best = int(means.argmax())
        s_best = per_point[i_best][idx]
        if s_best.mean <= 0.0:
            raise InsufficientHits(
                f"grid supremum vanished at depth index {nv}"
            )
        layer = dn_set(params.d, r1, nv)
        if not layer.contains(grid_pts[i_best]):
            mislocated += 1
        a_est = a_ests[idx]
        ratio = a_est.mean / s_best.mean
        rel = math.sqrt(_rel_se(a_est) ** 2 + _rel_se(s_best) ** 2)
        se = ratio * rel if math.isfinite(rel) else math.inf
        ratios.append((ratio, se))
        estimates.append(
            EstimateRecord(
                f"anchor-value-depth{nv}", a_est.mean, a_est.stderr, a_est.n,
                a_est.censored_fraction,
            )
        )
        estimates.append(
            EstimateRecord(
                f"grid-supremum-depth{nv}", s_best.mean, s_best.stderr,
                s_best.n, s_best.censored_fraction,
            )
        )
        estimates.append(EstimateRecord(f"anchor-ratio-depth{nv}", ratio, se, a_est.n, 0.0))

    checks.append(
        check_ge(
            "collapse-support-positive",
            "min over depths of anchor paths with positive weight >= required "
            "support",
            float(int(a_pos.min())),
            float(min_pos),
        )
    )
    checks.append(
        check_le(
            "collapse-max-location",
            "number of depths whose grid supremum falls outside the unit-reach "
            "layer",
            float(mislocated),
            0.0,
        )
    )
    worst = -math.inf
    for (ra, sa), (rb, sb) in zip(ratios[:-1], ratios[1:]):
        pooled = math.sqrt(sa * sa + sb * sb)
        worst = max(worst, (rb - ra) / pooled if pooled > 0 else math.inf)
    checks.append(
        check_le(
            "carleson-ratio-nonincreasing",
            "max consecutive increase of the anchor ratio, in pooled SE units, "
            "<= 2",
            worst,
            2.0,
        )
    )
    first, last = ratios[0][0], ratios[-1][0]
    checks.append(
        CheckRecord(
            "carleson-ratio-collapse",
            "anchor ratio at the deepest index < a quarter of the first",
            last,
            first / 4.0,
            0.0,
            bool(last < first / 4.0),
        )
    )
    return _finish(scenario, seed, checks, estimates, t0)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


EXPERIMENTS: dict[str, Callable[..., Report]] = {
    "green_ball_sandwich": green_ball_sandwich,
    "exit_kernel_bounds": exit_kernel_bounds,
    "harnack_ratio": harnack_ratio,
    "exit_time_bound": exit_time_bound,
    "boundary_ratio_convex": boundary_ratio_convex,
    "boundary_ratio_collapse": boundary_ratio_collapse,
}


def run_experiment(scenario: Scenario, seed: int = 0) -> Report:
    """Dispatch a parsed scenario to its registered experiment."""
    return EXPERIMENTS[scenario.name](scenario, seed)

"""Acceptance gate: one test per shipped criterion, at full stated scale.

Run ``pytest -v tests/test_acceptance.py`` to get exactly one PASS/FAIL
line per criterion.  Tolerances are pinned here and do not adapt to the
data; the statistical checks run at the path counts frozen in the shipped
scenario files.  The whole gate takes roughly 40 minutes on one core.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special

import truncstable.verify as verify
from truncstable import ProcessParams
from truncstable.domains import Ball
from truncstable.kernels import (
    char_exponent_psi,
    constant_A,
    constant_B,
    levy_density,
    sphere_surface_area,
    stable_green_ball,
    stable_poisson_ball,
)
from truncstable.simulator import wos_exit_batch
from truncstable.verify import CHECK_REGISTRY, parse_scenario, run_experiment

SCENARIO_DIR = Path(verify.__file__).parent / "scenarios"
ALL_COMBOS = [(d, a) for d in (2, 3) for a in (0.5, 1.0, 1.5)]


def _load(stem: str) -> dict:
    return json.loads((SCENARIO_DIR / f"{stem}.json").read_text())


@pytest.fixture(scope="module")
def full_report():
    """Lazy cache of full-scale scenario runs at seed 0 (shared per module)."""
    cache: dict = {}

    def get(stem: str):
        if stem not in cache:
            cache[stem] = run_experiment(parse_scenario(_load(stem)), seed=0)
        return cache[stem]

    return get


def _passed(report, check_id: str):
    record = {c.check_id: c for c in report.checks}[check_id]
    assert record.passed, (
        f"{check_id}: lhs={record.lhs!r} rhs={record.rhs!r} tol={record.tolerance!r}"
    )
    return record


def _estimate(report, label: str):
    return {e.label: e for e in report.estimates}[label]


def test_criterion_01_kernel_identities():
    # exit-position density integrates to 1 over the exterior (off-center)
    params = ProcessParams(2, 1.0)
    r, x = 0.7, np.array([0.2, 0.3])
    angles = np.linspace(0.0, 2.0 * math.pi, 257)[:-1]

    def ring_mass(rho):
        z = rho * np.stack([np.cos(angles), np.sin(angles)], axis=1)
        from truncstable.kernels import poisson_ball_array

        return poisson_ball_array(params, np.zeros(2), r, x, z).mean() * 2.0 * math.pi * rho

    total = (
        integrate.quad(ring_mass, r, 2.0 * r, limit=400)[0]
        + integrate.quad(ring_mass, 2.0 * r, np.inf, limit=400)[0]
    )
    assert abs(total - 1.0) < 1e-6

    # Green function symmetry and scaling
    x1, y1 = np.array([0.25, -0.1]), np.array([-0.3, 0.35])
    g1 = stable_green_ball(params, np.zeros(2), 0.9, x1, y1).value
    g2 = stable_green_ball(params, np.zeros(2), 0.9, y1, x1).value
    assert abs(g1 - g2) < 1e-12 * g1
    p3 = ProcessParams(3, 1.5)
    xs, ys = np.array([0.1, -0.05, 0.02]), np.array([0.2, 0.15, -0.1])
    lhs = stable_green_ball(p3, np.zeros(3), 0.45, xs, ys).value
    rhs = 0.45 ** (1.5 - 3) * stable_green_ball(
        p3, np.zeros(3), 1.0, xs / 0.45, ys / 0.45
    ).value
    assert lhs == pytest.approx(rhs, rel=1e-10)

    # over-unit jump mass matches its defining integral
    for d, alpha in ALL_COMBOS:
        p = ProcessParams(d, alpha)
        val, _ = integrate.quad(
            lambda s: levy_density(p, s) * sphere_surface_area(d) * s ** (d - 1),
            1.0,
            np.inf,
        )
        assert constant_B(p) == pytest.approx(val, rel=1e-8)


def test_criterion_02_char_exponent_asymptotics():
    for d, alpha in ALL_COMBOS:
        params = ProcessParams(d, alpha)
        coef = constant_A(params) * sphere_surface_area(d) / (2.0 * d * (2.0 - alpha))
        small = char_exponent_psi(params, 0.01).value
        assert abs(small / (1e-4 * coef) - 1.0) < 0.01, (d, alpha)
        t = 200.0
        large = char_exponent_psi(params, t).value
        assert abs(large - (t**alpha - constant_B(params))) < 1e-2 * t**alpha, (d, alpha)


def test_criterion_03_wos_against_exact_exit_law():
    params = ProcessParams(2, 1.0)
    r, n = 0.7, 1_000_000
    edges = r * np.array([1.0, 1.1, 1.25, 1.45, 1.7, 2.0, 2.5, 3.2, 4.5, 7.0, 12.0])
    pts = wos_exit_batch(params, Ball(np.zeros(2), r), np.zeros(2), n, seed=0)
    rho = np.linalg.norm(pts, axis=1)

    def cell_mass_quad(a, b):
        e1 = np.array([1.0, 0.0])
        val, _ = integrate.quad(
            lambda s: stable_poisson_ball(params, np.zeros(2), r, np.zeros(2), s * e1)
            * 2.0
            * math.pi
            * s,
            a,
            b,
            limit=400,
        )
        return val

    def tail_beta(R):
        return float(special.betainc(0.5, 0.5, (r / R) ** 2))

    for a, b in zip(edges[:-1], edges[1:]):
        mass = cell_mass_quad(a, b)
        assert mass == pytest.approx(tail_beta(a) - tail_beta(b), abs=2e-8)
        p_hat = float(((rho >= a) & (rho < b)).mean())
        se = math.sqrt(mass * (1.0 - mass) / n)
        assert abs(p_hat - mass) <= 3.0 * se, (a, b, p_hat, mass)


def test_criterion_04_green_sandwich_with_refinement_gates(full_report):
    for stem in ("green_sandwich_half", "green_sandwich_quarter"):
        report = full_report(stem)
        for check_id in CHECK_REGISTRY["green_ball_sandwich"]:
            _passed(report, check_id)
        assert _estimate(report, "cell-ratio-min").mean >= 0.9, stem
        assert _estimate(report, "cell-ratio-max").mean <= 2.2, stem


def test_criterion_05_exit_kernel_bounds_fit_once(full_report):
    report = full_report("exit_kernel_bounds")
    for check_id in CHECK_REGISTRY["exit_kernel_bounds"]:
        _passed(report, check_id)
    assert _passed(report, "beyond-range-zero").lhs == 0.0


def test_criterion_06_harnack_envelopes_and_cap(full_report):
    report = full_report("harnack_ratio")
    for check_id in CHECK_REGISTRY["harnack_ratio"]:
        _passed(report, check_id)
    assert _passed(report, "beyond-cap-source-reachable").lhs >= 1.0
    assert _passed(report, "beyond-cap-target-unreachable").lhs == 0.0


def test_criterion_07_exit_bound_scaling(full_report):
    report = full_report("exit_time_bound")
    for check_id in CHECK_REGISTRY["exit_time_bound"]:
        _passed(report, check_id)


def test_criterion_08_convex_boundary_ratio(full_report):
    report = full_report("boundary_ratio_convex")
    for check_id in CHECK_REGISTRY["boundary_ratio_convex"]:
        _passed(report, check_id)
    assert _passed(report, "boundary-ratio-control-identity").lhs == 1.0


def test_criterion_09_nonconvex_collapse(full_report):
    report = full_report("boundary_ratio_collapse")
    for check_id in CHECK_REGISTRY["boundary_ratio_collapse"]:
        _passed(report, check_id)
    first = _estimate(report, "anchor-ratio-depth3").mean
    last = _estimate(report, "anchor-ratio-depth8").mean
    assert last < first / 4.0


def test_criterion_10_seeded_reproducibility():
    doc = _load("exit_time_bound")
    doc["estimate"]["n"] = 4000
    bodies = []
    import numba

    for _ in range(2):
        for threads in range(1, numba.config.NUMBA_NUM_THREADS + 1):
            numba.set_num_threads(threads)
            report = run_experiment(parse_scenario(doc), seed=42)
            bodies.append(report.body_bytes())
    assert len(set(bodies)) == 1
    other = run_experiment(parse_scenario(doc), seed=43).body_bytes()
    assert other != bodies[0]

"""Estimators: target algebra, censoring policy, statistical contracts.

The walk-on-spheres cross-check at the bottom validates the Monte Carlo
stack against closed-form ball-exit laws with no truncation approximation
involved, so a failure there isolates estimator plumbing rather than the
process approximation.
"""

import math

import numpy as np
import pytest
from scipy import special

from truncstable import (
    AllPathsCensored,
    CapViolated,
    ConfigError,
    ExcessiveCensoring,
    InsufficientHits,
    ParamOutOfRange,
    ProcessParams,
)
from truncstable.domains import AxisBox, Ball, BallUnion, cn_set
from truncstable.estimators import (
    MAX_CENSORED_FRACTION,
    GridEstimate,
    MCEstimate,
    annulus_target,
    exit_density_histogram,
    green_density,
    harmonic_measure,
    harnack_ratio_profile,
    mean_exit_time,
    predicate_target,
    require_censoring_budget,
    shape_target,
    target_contains,
    target_volume,
)
from truncstable.simulator import OccupationGrid, SimConfig, wos_exit_batch

D2 = ProcessParams(2, 1.0)
BALL = Ball(np.zeros(2), 0.2)


def cfg(**kw):
    base = dict(epsilon=0.05, time_step=1e-3, max_time=1e3, seed=11)
    base.update(kw)
    return SimConfig(**base)


class TestMCEstimate:
    def test_validation(self):
        with pytest.raises(ParamOutOfRange):
            MCEstimate(0.5, -1.0, 10, 0, 0.0)
        with pytest.raises(ParamOutOfRange):
            MCEstimate(0.5, 0.1, 10, 0, 1.5)
        with pytest.raises(ParamOutOfRange):
            MCEstimate(0.5, 0.1, 0, 0, 0.0)

    def test_budget_guard(self):
        ok = MCEstimate(0.5, 0.1, 1000, 0, 0.0)
        require_censoring_budget(ok)
        bad = MCEstimate(0.5, 0.1, 1000, 0, 0.01)
        with pytest.raises(ExcessiveCensoring):
            require_censoring_budget(bad)
        assert MAX_CENSORED_FRACTION == 1e-3


class TestTargets:
    def test_annulus_half_open(self):
        t = annulus_target(np.zeros(2), 0.5, 1.0)
        pts = np.array([[0.5, 0.0], [0.999, 0.0], [1.0, 0.0], [0.49, 0.0]])
        assert target_contains(t, pts).tolist() == [True, True, False, False]

    def test_shape_and_predicate(self):
        t = shape_target(Ball(np.zeros(2), 1.0))
        assert target_contains(t, np.array([[0.5, 0.0], [1.5, 0.0]])).tolist() == [
            True,
            False,
        ]
        cn = cn_set(2, 0.25, 3)
        p = predicate_target("cn", cn.contains_points)
        probe = np.array([[0.0, -0.999], [0.0, 0.0]])
        assert target_contains(p, probe).tolist() == [True, False]

    def test_predicate_shape_validated(self):
        bad = predicate_target("bad", lambda pts: np.ones((2, 2), dtype=bool))
        with pytest.raises(ConfigError):
            target_contains(bad, np.zeros((3, 2)))

    def test_volumes(self):
        assert target_volume(annulus_target(np.zeros(2), 0.5, 1.0), 2) == pytest.approx(
            math.pi * 0.75, rel=1e-12
        )
        assert target_volume(shape_target(Ball(np.zeros(3), 2.0)), 3) == pytest.approx(
            4.0 / 3.0 * math.pi * 8.0, rel=1e-12
        )
        box = AxisBox(np.array([0.0, 0.0]), np.array([2.0, 3.0]))
        assert target_volume(shape_target(box), 2) == pytest.approx(6.0, rel=1e-12)
        with pytest.raises(ConfigError):
            target_volume(predicate_target("p", lambda x: x[:, 0] > 0), 2)


class TestHarmonicMeasure:
    def test_entire_complement(self):
        t = predicate_target("everything", lambda pts: np.ones(pts.shape[0], bool))
        est = harmonic_measure(D2, BALL, np.zeros(2), t, 500, cfg())
        assert est.mean == 1.0 and est.stderr == 0.0
        assert est.n == 500 and est.censored_fraction == 0.0

    def test_mirror_symmetry(self):
        box = AxisBox(np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
        left = predicate_target("left", lambda pts: pts[:, 0] <= -1.0)
        right = predicate_target("right", lambda pts: pts[:, 0] >= 1.0)
        a = harmonic_measure(D2, box, np.zeros(2), left, 4000, cfg())
        b = harmonic_measure(D2, box, np.zeros(2), right, 4000, cfg())
        pooled = math.hypot(a.stderr, b.stderr)
        assert abs(a.mean - b.mean) < 3.0 * pooled

    def test_linearity_same_paths(self):
        inner = annulus_target(np.zeros(2), 0.2, 0.5)
        outer = annulus_target(np.zeros(2), 0.5, 1.2)
        both = annulus_target(np.zeros(2), 0.2, 1.2)
        ea = harmonic_measure(D2, BALL, np.zeros(2), inner, 1500, cfg())
        eb = harmonic_measure(D2, BALL, np.zeros(2), outer, 1500, cfg())
        eu = harmonic_measure(D2, BALL, np.zeros(2), both, 1500, cfg())
        ka = round(ea.mean * ea.n)
        kb = round(eb.mean * eb.n)
        ku = round(eu.mean * eu.n)
        assert ka + kb == ku  # identical paths make the counts add exactly
        assert ea.mean + eb.mean == pytest.approx(eu.mean, abs=1e-15)

    def test_truncated_vs_stable_annulus_sandwich(self):
        # exit mass of the annulus between the ball and unit distance lies
        # between the stable mass Q and 2Q (up to MC noise)
        r = 0.2
        target = annulus_target(np.zeros(2), r, 1.0 - r)
        est = harmonic_measure(
            D2, BALL, np.zeros(2), target, 20000, cfg(epsilon=0.02)
        )
        w_in = 1.0  # u at rho = r
        w_out = r * r / (1.0 - r) ** 2
        q = special.betainc(0.5, 0.5, w_in) - special.betainc(0.5, 0.5, w_out)
        slack = 3.0 * est.stderr
        assert q - slack <= est.mean <= 2.0 * q + slack

    def test_all_paths_censored(self):
        t = annulus_target(np.zeros(2), 0.2, 1.2)
        with pytest.raises(AllPathsCensored):
            harmonic_measure(D2, BALL, np.zeros(2), t, 50, cfg(max_time=1e-4))


class TestExitDensityHistogram:
    def test_masses_cover_reachable_set(self):
        # exits from the ball land strictly within one jump range
        cells = [
            annulus_target(np.zeros(2), 0.2, 0.7),
            annulus_target(np.zeros(2), 0.7, 1.2),
        ]
        ests = exit_density_histogram(D2, BALL, np.zeros(2), cells, 3000, cfg())
        masses = [e.mean * target_volume(c, 2) for e, c in zip(ests, cells)]
        assert sum(masses) == pytest.approx(1.0, abs=1e-12)
        assert all(e.mean >= 0.0 for e in ests)

    def test_partial_partition_sums_below_one(self):
        cells = [annulus_target(np.zeros(2), 0.2, 0.4)]
        ests = exit_density_histogram(D2, BALL, np.zeros(2), cells, 2000, cfg())
        assert ests[0].mean * target_volume(cells[0], 2) < 1.0

    def test_beyond_jump_range_empty(self):
        cells = [annulus_target(np.zeros(2), 1.3, 1.6)]
        ests = exit_density_histogram(D2, BALL, np.zeros(2), cells, 2000, cfg())
        assert ests[0].mean == 0.0 and ests[0].stderr == 0.0

    def test_overlap_rejected(self):
        cells = [
            annulus_target(np.zeros(2), 0.2, 0.8),
            annulus_target(np.zeros(2), 0.5, 1.2),
        ]
        with pytest.raises(ConfigError):
            exit_density_histogram(D2, BALL, np.zeros(2), cells, 1000, cfg())

    def test_empty_partition_rejected(self):
        with pytest.raises(ConfigError):
            exit_density_histogram(D2, BALL, np.zeros(2), [], 1000, cfg())


class TestGreenDensity:
    def test_entries_and_center_peak(self):
        grid = OccupationGrid.cover(BALL, 9)
        est = green_density(D2, BALL, np.zeros(2), grid, 3000, cfg())
        assert isinstance(est, GridEstimate)
        assert (est.means >= 0.0).all() and (est.stderrs >= 0.0).all()
        assert est.means.argmax() == est.grid.cell_index(np.zeros(2))
        assert grid.total_time() == 0.0  # input grid untouched

    def test_integral_matches_mean_exit_time(self):
        grid = OccupationGrid.cover(BALL, 9)
        est = green_density(D2, BALL, np.zeros(2), grid, 3000, cfg())
        met = mean_exit_time(D2, BALL, np.zeros(2), 3000, cfg())
        # identical seed and stream base: identical paths, exact identity
        assert est.integral() == pytest.approx(met.mean, rel=1e-12)
        assert abs(est.integral() - met.mean) < 3.0 * met.stderr

    def test_stderr_scale(self):
        grid = OccupationGrid.cover(BALL, 5)
        a = green_density(D2, BALL, np.zeros(2), grid, 4000, cfg(seed=1))
        b = green_density(D2, BALL, np.zeros(2), grid, 4000, cfg(seed=2))
        k = a.grid.cell_index(np.zeros(2))
        pooled = math.hypot(float(a.stderrs[k]), float(b.stderrs[k]))
        assert abs(float(a.means[k]) - float(b.means[k])) < 5.0 * pooled

    def test_cell_accessor(self):
        grid = OccupationGrid.cover(BALL, 5)
        est = green_density(D2, BALL, np.zeros(2), grid, 500, cfg())
        cell = est.cell(12)
        assert cell.mean == float(est.means[12])
        assert cell.n == est.n


class TestMeanExitTime:
    def test_monotone_in_radius(self):
        big = mean_exit_time(D2, Ball(np.zeros(2), 0.2), np.zeros(2), 3000, cfg())
        small = mean_exit_time(D2, Ball(np.zeros(2), 0.1), np.zeros(2), 3000, cfg())
        pooled = math.hypot(big.stderr, small.stderr)
        assert small.mean < big.mean + 3.0 * pooled

    def test_stable_sandwich(self):
        r = 0.15
        t_stable = 2.0 / math.pi * r
        est = mean_exit_time(
            D2, Ball(np.zeros(2), r), np.zeros(2), 3000, cfg(epsilon=0.02)
        )
        assert t_stable - 3.0 * est.stderr < est.mean < 2.0 * t_stable + 3.0 * est.stderr

    def test_vanishes_towards_boundary(self):
        means = []
        for xn in (0.0, 0.15, 0.1875):
            est = mean_exit_time(
                D2, BALL, np.array([xn, 0.0]), 2000, cfg()
            )
            means.append(est.mean)
        assert means[0] > means[1] > means[2]

    def test_all_paths_censored(self):
        with pytest.raises(AllPathsCensored):
            mean_exit_time(D2, BALL, np.zeros(2), 50, cfg(max_time=1e-4))


class TestHarnackRatioProfile:
    FAR = None

    @classmethod
    def setup_class(cls):
        cls.FAR = annulus_target(np.zeros(2), 0.6, 1.4)

    def test_identical_centers_exact_one(self):
        out = harnack_ratio_profile(
            D2, (np.array([0.05, 0.0]), np.array([0.05, 0.0])), 0.2, self.FAR, 10, cfg()
        )
        assert out == (1.0, 0.0, 1.0)

    def test_mirror_symmetry(self):
        ratio, stderr, m = harnack_ratio_profile(
            D2, (np.array([-0.1, 0.0]), np.array([0.1, 0.0])), 0.2, self.FAR, 6000, cfg()
        )
        assert m == 1.0
        assert abs(ratio - 1.0) < 3.0 * stderr + 1e-3

    def test_separation_multiple_reported(self):
        ratio, stderr, m = harnack_ratio_profile(
            D2, (np.array([-0.2, 0.0]), np.array([0.2, 0.0])), 0.2, self.FAR, 2000, cfg()
        )
        assert m == pytest.approx(2.0, rel=1e-12)
        assert ratio > 0.0 and stderr > 0.0

    def test_paired_stderr_below_independent(self):
        # with common random numbers the covariance term must reduce the
        # standard error relative to treating the batches as independent
        ratio, stderr, _ = harnack_ratio_profile(
            D2, (np.array([-0.05, 0.0]), np.array([0.05, 0.0])), 0.2, self.FAR, 6000, cfg()
        )
        from truncstable.estimators import target_contains as tc
        from truncstable.simulator import simulate_exit_batch

        union = BallUnion(
            (Ball(np.array([-0.05, 0.0]), 0.2), Ball(np.array([0.05, 0.0]), 0.2))
        )
        b1 = simulate_exit_batch(D2, union, np.array([-0.05, 0.0]), cfg(), 6000)
        b2 = simulate_exit_batch(D2, union, np.array([0.05, 0.0]), cfg(), 6000)
        h1 = tc(self.FAR, b1.positions).astype(float)
        h2 = tc(self.FAR, b2.positions).astype(float)
        m1, m2 = h1.mean(), h2.mean()
        v1, v2 = h1.var(ddof=1), h2.var(ddof=1)
        indep = math.sqrt((v1 + (m1 / m2) ** 2 * v2) / (6000 * m2 * m2))
        assert stderr < indep

    def test_cap_violated(self):
        far = np.array([0.96, 0.0])
        with pytest.raises(CapViolated):
            harnack_ratio_profile(D2, (np.zeros(2), far), 0.1, self.FAR, 10, cfg())

    def test_radius_above_comparability_rejected(self):
        with pytest.raises(ParamOutOfRange):
            harnack_ratio_profile(
                D2, (np.zeros(2), np.array([0.1, 0.0])), 0.3, self.FAR, 10, cfg()
            )

    def test_unreachable_target_raises(self):
        unreachable = annulus_target(np.zeros(2), 50.0, 51.0)
        with pytest.raises(InsufficientHits):
            harnack_ratio_profile(
                D2, (np.array([-0.1, 0.0]), np.array([0.1, 0.0])), 0.2,
                unreachable, 200, cfg(),
            )


class TestWalkOnSpheresOracleAgreement:
    def test_annulus_masses_match_closed_form(self):
        # untruncated process from the ball center: the radial exit law has
        # a closed form, so this validates targets + statistics end to end
        params = ProcessParams(2, 1.0)
        r = 1.0
        n = 20000
        z = wos_exit_batch(params, Ball(np.zeros(2), r), np.zeros(2), n, seed=3)
        for r0, r1 in [(1.0, 1.3), (1.3, 2.0), (2.0, 5.0)]:
            t = annulus_target(np.zeros(2), r0, r1)
            emp = float(target_contains(t, z).mean())
            exact = special.betainc(0.5, 0.5, (r / r0) ** 2) - special.betainc(
                0.5, 0.5, (r / r1) ** 2
            )
            se = math.sqrt(exact * (1.0 - exact) / n)
            assert abs(emp - exact) < 3.0 * se


class TestColumnExitEstimates:
    """Weighted column-exit probabilities against direct hit counting.

    The comparison runs on a geometry where both estimators resolve the
    probability (ball at height 0.5, column below height 0): the paths are
    identical (same seed), so the per-path difference between the intensity
    weight and the exit indicator has mean zero up to the time-step
    discretization, and its sample standard error gives a sharp paired test.
    """

    @pytest.mark.parametrize("alpha", [1.0, 1.5])
    def test_matches_indicator_counting(self, alpha):
        from truncstable.estimators import column_exit_estimates
        from truncstable.simulator import column_exit_weights, simulate_exit_batch

        params = ProcessParams(2, alpha)
        dom = Ball(np.array([0.0, 0.5]), 0.3)
        start = np.array([0.0, 0.5])
        config = cfg(epsilon=0.05, time_step=2e-3, seed=31)
        n = 20_000
        weights, batch = column_exit_weights(
            params, dom, start, [0.0], 0.4, config, n
        )
        assert not batch.censored.any()
        hits = (
            (np.abs(batch.positions[:, 0]) <= 0.4) & (batch.positions[:, 1] <= 0.0)
        ).astype(float)
        assert hits.mean() > 0.01  # the regime really is feasible for both
        diff = weights[:, 0] - hits
        se = diff.std(ddof=1) / math.sqrt(n)
        # paired comparison: zero mean up to O(h) discretization skew
        assert abs(diff.mean()) < 4.0 * se + 5e-3 * hits.mean()
        # the weighted estimator must be the lower-variance one by a wide
        # margin -- that variance gap is its entire reason to exist
        assert weights[:, 0].std(ddof=1) < 0.5 * hits.std(ddof=1)

        ests, positive = column_exit_estimates(
            params, dom, start, [0.0], 0.4, n, config
        )
        assert ests[0].mean == pytest.approx(float(weights[:, 0].mean()))
        assert ests[0].n == n and positive[0] == int((weights[:, 0] > 0).sum())

    def test_positive_support_and_unreachable_column(self):
        from truncstable.estimators import column_exit_estimates

        params = ProcessParams(2, 1.0)
        dom = Ball(np.array([0.0, 0.5]), 0.3)
        ests, positive = column_exit_estimates(
            params,
            dom,
            np.array([0.0, 0.5]),
            [0.0, -0.9],
            0.4,
            400,
            cfg(epsilon=0.05, time_step=2e-3, seed=4),
        )
        assert ests[0].mean > 0.0 and positive[0] > 350
        assert ests[1].mean == 0.0 and ests[1].stderr == 0.0 and positive[1] == 0

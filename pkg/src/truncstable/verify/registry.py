"""The registered experiment set and the check ids each one must emit.

This table is the single source of truth tying scenario names to the named
checks in their reports; a test asserts that every experiment emits exactly
its declared ids, so a silently dropped or renamed check cannot pass CI.
"""

from __future__ import annotations

__all__ = ["CHECK_REGISTRY", "EXPERIMENT_NAMES", "all_check_ids"]

CHECK_REGISTRY: dict[str, tuple[str, ...]] = {
    # occupation-density sandwich against the closed-form ball Green function
    "green_ball_sandwich": (
        "green-cell-lower",
        "green-cell-upper",
        "refinement-gate-jump-cutoff",
        "refinement-gate-time-step",
    ),
    # exit-position density bounds: stable-kernel sandwich inside, flat
    # shell bounds outside, nothing beyond the jump range
    "exit_kernel_bounds": (
        "exit-mass-lower",
        "exit-mass-upper",
        "shell-mass-upper",
        "shell-mass-lower",
        "beyond-range-zero",
    ),
    # two-ball interior Harnack ratios with the separation-capped envelope
    "harnack_ratio": (
        "harnack-identical-centers",
        "harnack-upper-envelope",
        "harnack-lower-envelope",
        "harnack-cap-enforced",
        "beyond-cap-source-reachable",
        "beyond-cap-target-unreachable",
    ),
    # exit probability vs scaled mean exit time, plus inner-ball hitting
    "exit_time_bound": (
        "exit-ratio-positive",
        "exit-ratio-scale-stable",
        "hit-probability-scaling",
    ),
    # boundary-ratio comparability near a convex boundary point
    "boundary_ratio_convex": (
        "boundary-ratio-oscillation",
        "boundary-ratio-scale-stable",
        "boundary-ratio-control-identity",
        "boundary-ratio-limit",
        "carleson-anchor-lower",
    ),
    # falsification: the anchored-ratio collapse on the slab domain
    "boundary_ratio_collapse": (
        "collapse-support-positive",
        "collapse-max-location",
        "carleson-ratio-nonincreasing",
        "carleson-ratio-collapse",
    ),
}

EXPERIMENT_NAMES = tuple(CHECK_REGISTRY)


def all_check_ids() -> frozenset[str]:
    return frozenset(cid for ids in CHECK_REGISTRY.values() for cid in ids)

"""Path simulation: truncated-process exits, occupation time, exact ball
exits for the untruncated process, and walk-on-spheres."""

from .api import (
    ExitBatch,
    column_exit_weights,
    jump_rate,
    small_jump_std,
    occupation_batch,
    sample_stable_ball_exit,
    sample_truncated_jump,
    simulate_exit,
    simulate_exit_batch,
    simulate_occupation,
    stable_ball_exit_batch,
    walk_on_spheres_exit,
    wos_exit_batch,
)
from .config import ExitRecord, OccupationGrid, SimConfig

__all__ = [
    "ExitBatch",
    "ExitRecord",
    "OccupationGrid",
    "SimConfig",
    "column_exit_weights",
    "jump_rate",
    "small_jump_std",
    "occupation_batch",
    "sample_stable_ball_exit",
    "sample_truncated_jump",
    "simulate_exit",
    "simulate_exit_batch",
    "simulate_occupation",
    "stable_ball_exit_batch",
    "walk_on_spheres_exit",
    "wos_exit_batch",
]

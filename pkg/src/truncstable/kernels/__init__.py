"""Closed-form constants, kernels on balls, and derived quadrature quantities."""

from .ball import (
    compute_r0,
    conditioned_exit_time_ball,
    expected_exit_time_ball,
    green_ball_array,
    poisson_ball_array,
    stable_green_ball,
    stable_poisson_ball,
    truncated_poisson_ball_bounds,
)
from .constants import (
    char_exponent_psi,
    constant_A,
    constant_B,
    levy_density,
    sphere_surface_area,
)

__all__ = [
    "char_exponent_psi",
    "compute_r0",
    "conditioned_exit_time_ball",
    "constant_A",
    "constant_B",
    "expected_exit_time_ball",
    "green_ball_array",
    "levy_density",
    "poisson_ball_array",
    "sphere_surface_area",
    "stable_green_ball",
    "stable_poisson_ball",
    "truncated_poisson_ball_bounds",
]

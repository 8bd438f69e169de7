"""Closed-form constants and the characteristic exponent of the truncated process.

The symmetric stable process with index ``alpha`` in dimension ``d`` has jump
intensity ``constant_A(params) * |y|**(-d - alpha)``; the truncated process
keeps only jumps of size ``|y| < 1``.  This module evaluates:

* ``constant_A`` -- the jump-intensity normalization,
* ``constant_B`` -- the total intensity of the discarded jumps ``|y| >= 1``,
* ``sphere_surface_area`` -- surface area of the unit sphere (radial reduction
  helper),
* ``levy_density`` -- the radial jump intensity profile,
* ``char_exponent_psi`` -- the characteristic exponent of the truncated
  process, by singularity-regularized adaptive quadrature.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

from ..errors import ParamOutOfRange, QuadratureDidNotConverge
from ..params import KernelValue, ProcessParams, QuadratureConfig
from ._quadrature import gauss_interval


def constant_A(params: ProcessParams) -> float:
    """Normalization of the stable jump intensity ``A |y|^(-d-alpha)``.

    ``A = alpha * 2**(alpha-1) * pi**(-d/2) * Gamma((d+alpha)/2)
    / Gamma(1-alpha/2)``; strictly positive for every valid parameter set.
    """
    d, alpha = params.d, params.alpha
    return (
        alpha
        * 2.0 ** (alpha - 1.0)
        * math.pi ** (-d / 2.0)
        * math.gamma((d + alpha) / 2.0)
        / math.gamma(1.0 - alpha / 2.0)
    )


def sphere_surface_area(d: int) -> float:
    """Surface area of the unit sphere in R^d: ``2 pi^(d/2) / Gamma(d/2)``."""
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ParamOutOfRange(f"dimension must be an integer >= 1, got {d!r}")
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def constant_B(params: ProcessParams) -> float:
    """Total intensity of jumps of size >= 1: the mass removed by truncation.

    Radial integration of the jump intensity over ``{|y| >= 1}`` gives
    ``A * omega / alpha`` with ``omega`` the unit-sphere area.
    """
    return constant_A(params) * sphere_surface_area(params.d) / params.alpha


def levy_density(params: ProcessParams, distance):
    """Jump intensity at the given jump size(s): ``A * distance**(-d-alpha)``.

    Accepts a scalar or array of positive distances.  The truncated process
    uses this profile for jump sizes below 1 and zero beyond.
    """
    r = np.asarray(distance, dtype=float)
    if np.any(r <= 0.0):
        raise ParamOutOfRange("jump size must be positive")
    out = constant_A(params) * r ** (-params.d - params.alpha)
    return float(out) if np.isscalar(distance) else out


@lru_cache(maxsize=128)
def _cos_average_rule(d: int, panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature rule for the spherical average of ``cos(t * e_1 . e)``.

    Returns ``(cos(phi_j), w_j)`` with normalized weights, so the average is
    ``sum_j w_j * cos(t * cos(phi_j))``.  The polar-angle density on the
    sphere is ``sin(phi)**(d-2)``; ``panels`` composite 64-node Gauss panels
    over [0, pi] resolve the oscillation of ``cos(t * cos phi)`` (roughly one
    panel per 30 units of ``t``).
    """
    edges = np.linspace(0.0, math.pi, panels + 1)
    base_x, base_w = gauss_interval(64, 0.0, 1.0)
    xs = []
    ws = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(lo + (hi - lo) * base_x)
        ws.append((hi - lo) * base_w)
    nodes = np.concatenate(xs)
    weights = np.concatenate(ws)
    wt = weights * np.sin(nodes) ** (d - 2)
    wt = wt / wt.sum()
    cos_nodes = np.cos(nodes)
    cos_nodes.setflags(write=False)
    wt.setflags(write=False)
    return cos_nodes, wt


def _cos_sphere_average(d: int, t: np.ndarray) -> np.ndarray:
    """Average of ``cos(t * e . u)`` over unit vectors ``u``, vectorized in t."""
    return 1.0 - _one_minus_cos_sphere_average(d, t)


def _one_minus_cos_sphere_average(d: int, t: np.ndarray) -> np.ndarray:
    """Average of ``1 - cos(t * e . u)`` over unit vectors ``u``.

    Uses ``1 - cos(s) = 2 sin(s/2)**2`` so tiny values of ``t`` suffer no
    floating-point cancellation (the characteristic exponent integrand is
    dominated by this difference near the origin).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    tmax = float(t.max(initial=0.0))
    panels = max(1, math.ceil(tmax / 30.0))
    cos_nodes, wt = _cos_average_rule(d, panels)
    return 2.0 * (np.sin(np.multiply.outer(t, cos_nodes) / 2.0) ** 2 @ wt)


def char_exponent_psi(
    params: ProcessParams,
    xi_norm: float,
    quad: QuadratureConfig | None = None,
) -> KernelValue:
    """Characteristic exponent of the truncated process at frequency ``|xi|``.

    The exponent is radial:
    ``psi(xi) = A * integral_{|y|<1} (1 - cos(xi . y)) |y|^(-d-alpha) dy``,
    reduced to a 1-D radial integral against the spherical cosine average.
    The radial variable is substituted as ``r = v**(1/(2-alpha))`` so that the
    integrand is bounded at the origin for every ``alpha``, then integrated
    adaptively.

    Raises
    ------
    QuadratureDidNotConverge
        If the adaptive rule cannot meet the requested tolerances within the
        configured subdivision limit.
    ParamOutOfRange
        If ``xi_norm`` is negative.
    """
    if quad is None:
        quad = QuadratureConfig()
    t = float(xi_norm)
    if t < 0.0:
        raise ParamOutOfRange(f"frequency magnitude must be >= 0, got {t}")
    if t == 0.0:
        return KernelValue(0.0, 0.0)

    d, alpha = params.d, params.alpha
    prefactor = constant_A(params) * sphere_surface_area(d)
    p = 1.0 / (2.0 - alpha)

    def integrand(v: float) -> float:
        r = v**p
        one_minus_avg = float(_one_minus_cos_sphere_average(d, np.array([t * r]))[0])
        return p * one_minus_avg * v ** (-1.0 - p * alpha)

    result = integrate.quad(
        integrand,
        0.0,
        1.0,
        epsabs=quad.abs_tol / prefactor,
        epsrel=quad.rel_tol,
        limit=quad.max_subdivisions,
        full_output=1,
    )
    raw, raw_err = result[0], result[1]
    value = prefactor * raw
    est_error = prefactor * raw_err
    if len(result) > 3 or not quad.accepts(value, est_error):
        raise QuadratureDidNotConverge(
            f"characteristic exponent at |xi|={t}: estimated error "
            f"{est_error:.3e} exceeds tolerance for value {value:.6e}"
        )
    return KernelValue(value, est_error)

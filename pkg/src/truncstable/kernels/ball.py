"""Ball kernels of the rotationally symmetric stable process.

Closed forms on balls -- the exit-position (Poisson) kernel and the Green
function -- plus quadrature-based derived quantities: expected exit times,
exit times of the process conditioned on its eventual position, and the
certified comparison radius ``compute_r0`` below which the truncated
process' Green function and Poisson kernel are sandwiched between one and
two times their untruncated counterparts.

Quadrature strategy for the volume integrals: polar coordinates around each
singular point with the radial substitution ``s = s_max * u**(1/alpha)``
(which integrates the ``s**(alpha-1)`` singularity exactly), and a remainder
region integrated along rays with node panels clustered at the steep layers
near the excluded tubes and the ball boundary.  All rules are fixed-order
and deterministic; error estimates come from comparing two resolutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import (
    CoincidentPoints,
    DimensionMismatch,
    ParamOutOfRange,
    PointNotExterior,
    PointNotInterior,
    QuadratureDidNotConverge,
    RadiusTooLarge,
)
from ..params import VOLUME_QUAD, KernelValue, ProcessParams, QuadratureConfig
from ._quadrature import composite_01, gauss_interval
from .constants import constant_B, sphere_surface_area

__all__ = [
    "stable_poisson_ball",
    "poisson_ball_array",
    "stable_green_ball",
    "green_ball_array",
    "expected_exit_time_ball",
    "conditioned_exit_time_ball",
    "compute_r0",
    "truncated_poisson_ball_bounds",
]


# --------------------------------------------------------------------------
# point handling and closed-form prefactors
# --------------------------------------------------------------------------


def _as_point(p, d: int, name: str = "point") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (d,):
        raise DimensionMismatch(
            f"{name} must have {d} coordinates, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ParamOutOfRange(f"{name} must have finite coordinates")
    return arr


def _check_radius(radius: float) -> float:
    r = float(radius)
    if not (r > 0.0 and math.isfinite(r)):
        raise ParamOutOfRange(f"radius must be positive and finite, got {radius}")
    return r


def _poisson_c1(d: int, alpha: float) -> float:
    return math.gamma(d / 2.0) * math.sin(math.pi * alpha / 2.0) * math.pi ** (
        -d / 2.0 - 1.0
    )


def _green_prefactor(d: int, alpha: float) -> float:
    return math.gamma(d / 2.0) / (
        2.0**alpha * math.pi ** (d / 2.0) * math.gamma(alpha / 2.0) ** 2
    )


def _green_factor(d: int, alpha: float, w: np.ndarray) -> np.ndarray:
    """``integral_0^w s**(alpha/2-1) (1+s)**(-d/2) ds`` vectorized in w.

    Evaluated through the regularized incomplete beta function with the
    branch split at w = 1 so both small and large w are computed stably.
    """
    a = alpha / 2.0
    b = (d - alpha) / 2.0
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    out = np.empty_like(w)
    small = w <= 1.0
    ws = w[small]
    out[small] = special.betainc(a, b, ws / (1.0 + ws))
    wl = w[~small]
    out[~small] = 1.0 - special.betainc(b, a, 1.0 / (1.0 + wl))
    return special.beta(a, b) * out


def _green_from_scalars(
    d: int, alpha: float, un2: np.ndarray, vn2: np.ndarray, dist2: np.ndarray
) -> np.ndarray:
    """Unit-ball Green function from ``|u|^2``, ``|v|^2``, ``|u-v|^2`` arrays."""
    w = (1.0 - un2) * (1.0 - vn2) / dist2
    return (
        _green_prefactor(d, alpha)
        * dist2 ** (0.5 * (alpha - d))
        * _green_factor(d, alpha, w)
    )


# --------------------------------------------------------------------------
# Poisson kernel
# --------------------------------------------------------------------------


def stable_poisson_ball(
    params: ProcessParams, center, radius: float, x, z
) -> float:
    """Exit-position density at ``z`` for the stable process leaving a ball.

    For the ball ``B(center, radius)`` and an interior start ``x``, the exit
    position has density
    ``c1 * (r^2-|x'|^2)^(a/2) * (|z'|^2-r^2)^(-a/2) * |x-z|^-d`` over the
    exterior, with ``c1 = Gamma(d/2) sin(pi a/2) pi^(-d/2-1)`` (validated by
    the normalization test: the density integrates to 1).
    """
    d, alpha = params.d, params.alpha
    r = _check_radius(radius)
    c = _as_point(center, d, "center")
    xp = _as_point(x, d, "x") - c
    zp = _as_point(z, d, "z") - c
    xn2 = float(xp @ xp)
    zn2 = float(zp @ zp)
    if xn2 >= r * r:
        raise PointNotInterior(f"|x-center|={math.sqrt(xn2):.6g} must be < {r}")
    if zn2 <= r * r:
        raise PointNotExterior(f"|z-center|={math.sqrt(zn2):.6g} must be > {r}")
    diff = xp - zp
    dist2 = float(diff @ diff)
    return (
        _poisson_c1(d, alpha)
        * (r * r - xn2) ** (alpha / 2.0)
        * (zn2 - r * r) ** (-alpha / 2.0)
        * dist2 ** (-d / 2.0)
    )


def poisson_ball_array(
    params: ProcessParams, center, radius: float, x, z_points: np.ndarray
) -> np.ndarray:
    """Vectorized exit-position density over rows of ``z_points``.

    No per-point validation: all rows must lie strictly outside the closed
    ball (callers integrate over exterior regions).
    """
    d, alpha = params.d, params.alpha
    r = float(radius)
    c = np.asarray(center, dtype=float)
    xp = np.asarray(x, dtype=float) - c
    zp = np.asarray(z_points, dtype=float) - c
    xn2 = float(xp @ xp)
    zn2 = np.einsum("...i,...i->...", zp, zp)
    diff = zp - xp
    dist2 = np.einsum("...i,...i->...", diff, diff)
    return (
        _poisson_c1(d, alpha)
        * (r * r - xn2) ** (alpha / 2.0)
        * (zn2 - r * r) ** (-alpha / 2.0)
        * dist2 ** (-d / 2.0)
    )


# --------------------------------------------------------------------------
# Green function
# --------------------------------------------------------------------------


def stable_green_ball(
    params: ProcessParams,
    center,
    radius: float,
    x,
    y,
    quad: QuadratureConfig | None = None,
) -> KernelValue:
    """Green function of the stable process killed outside a ball.

    Closed form ``C(d,a) |x-y|^(a-d) * integral_0^w s^(a/2-1)(1+s)^(-d/2) ds``
    with ``w = (r^2-|x'|^2)(r^2-|y'|^2) / (r^2 |x-y|^2)``; the integral is an
    incomplete beta function, so ``est_error`` reflects round-off only (the
    ``quad`` argument is accepted for interface uniformity).
    """
    del quad  # closed form; kept for signature uniformity
    d, alpha = params.d, params.alpha
    r = _check_radius(radius)
    c = _as_point(center, d, "center")
    xp = _as_point(x, d, "x") - c
    yp = _as_point(y, d, "y") - c
    xn2 = float(xp @ xp)
    yn2 = float(yp @ yp)
    if xn2 >= r * r:
        raise PointNotInterior(f"|x-center|={math.sqrt(xn2):.6g} must be < {r}")
    if yn2 >= r * r:
        raise PointNotInterior(f"|y-center|={math.sqrt(yn2):.6g} must be < {r}")
    diff = xp - yp
    dist2 = float(diff @ diff)
    if dist2 == 0.0:
        raise CoincidentPoints("Green function requires x != y")
    w = np.array([(r * r - xn2) * (r * r - yn2) / (r * r * dist2)])
    value = float(
        _green_prefactor(d, alpha)
        * dist2 ** (0.5 * (alpha - d))
        * _green_factor(d, alpha, w)[0]
    )
    return KernelValue(value, 8.0 * np.finfo(float).eps * abs(value))


def green_ball_array(
    params: ProcessParams, center, radius: float, x_points, y_points
) -> np.ndarray:
    """Vectorized ball Green function over broadcastable point arrays.

    No per-point validation: rows must be strictly inside the ball and
    pairwise distinct (used for cell averaging in the verification checks).
    """
    d, alpha = params.d, params.alpha
    r = float(radius)
    c = np.asarray(center, dtype=float)
    xp = np.asarray(x_points, dtype=float) - c
    yp = np.asarray(y_points, dtype=float) - c
    xn2 = np.einsum("...i,...i->...", xp, xp)
    yn2 = np.einsum("...i,...i->...", yp, yp)
    diff = xp - yp
    dist2 = np.einsum("...i,...i->...", diff, diff)
    w = (r * r - xn2) * (r * r - yn2) / (r * r * dist2)
    return (
        _green_prefactor(d, alpha)
        * dist2 ** (0.5 * (alpha - d))
        * _green_factor(d, alpha, np.asarray(w))
    )


# --------------------------------------------------------------------------
# fixed-order polar quadrature machinery
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Resolution:
    """Node counts for one evaluation of the polar volume rules."""

    n_theta: int  # polar-angle Gauss nodes on [0, pi]
    n_chi: int  # azimuthal nodes on [0, pi] (ignored when d == 2)
    n_u: int  # Gauss nodes per panel, substituted radial variable
    n_s: int  # Gauss nodes per panel, remainder ray segments
    split_theta: bool = True  # panel the polar angle at the tube-grazing kink


#: Radial panels for the substituted variable u in the singular regions; the
#: integrand has an algebraic kink of exponent alpha/2 at u = 1 (ball
#: boundary), so panels cluster there.
_U_BREAKS = (0.0, 0.35, 0.7, 0.9, 0.975, 0.995, 1.0)

#: Relative panels for remainder ray segments; both segment ends can sit at a
#: steep layer (excluded-tube edge or ball boundary), so panels cluster at
#: both ends.
_S_BREAKS = (0.0, 0.06, 0.2, 0.5, 0.8, 0.94, 1.0)

_RES_EXIT = (
    _Resolution(48, 0, 12, 0),
    _Resolution(96, 0, 20, 0),
    _Resolution(160, 0, 28, 0),
)

_RES_3G = (
    _Resolution(32, 12, 10, 8),
    _Resolution(48, 18, 14, 12),
    _Resolution(72, 28, 20, 16),
)

#: Cheap rule for the exhaustive grid scan inside compute_r0; candidates are
#: re-evaluated at the regular resolutions before the supremum is taken, so
#: the scan rule skips the kink-splitting panels and only needs to rank.
_RES_SCAN = _Resolution(10, 5, 5, 4, split_theta=False)


def _axis_rule(d: int, n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    """Sphere rule for integrands depending only on the angle to one axis.

    Returns ``(cos(theta), weight)`` with
    ``sum_j w_j f(cos theta_j) ~= integral_{S^{d-1}} f(e . axis) dsigma(e)``.
    """
    theta, wt = gauss_interval(n_theta, 0.0, math.pi)
    w = sphere_surface_area(d - 1) * np.sin(theta) ** (d - 2) * wt
    return np.cos(theta), w


def _plane_direction_grid(
    d: int,
    n_theta: int,
    n_chi: int,
    theta_breaks: tuple[float, ...] | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sphere rule for integrands set by two direction components.

    For integrands depending on a unit vector ``e`` only through ``e . axis``
    and ``e . v`` (``v`` a fixed unit vector orthogonal to the axis), returns
    flattened arrays ``(cos_theta, sin_theta*cos_chi, weight)`` such that
    ``sum w_j f(ct_j, sc_j) ~= integral_{S^{d-1}} f(e.axis, e.v) dsigma``.
    The azimuthal reduction uses the exact ``sin(chi)**(d-3)`` marginal for
    d >= 4, a uniform midpoint rule for d = 3, and the two half-plane
    directions for d = 2.

    When ``theta_breaks`` is given, the polar angle uses a composite Gauss
    rule with ``n_theta`` nodes per panel (callers place breaks at angles
    where the radial integral has a kink, e.g. tube-grazing directions).
    """
    if theta_breaks is None:
        theta, wt = gauss_interval(n_theta, 0.0, math.pi)
    else:
        base_x, base_w = gauss_interval(n_theta, 0.0, 1.0)
        pieces_x = []
        pieces_w = []
        for lo, hi in zip(theta_breaks[:-1], theta_breaks[1:]):
            width = hi - lo
            if width <= 0.0:
                continue
            pieces_x.append(lo + width * base_x)
            pieces_w.append(width * base_w)
        theta = np.concatenate(pieces_x)
        wt = np.concatenate(pieces_w)
    ct = np.cos(theta)
    st = np.sin(theta)
    if d == 2:
        w_theta = wt
        cchi = np.array([1.0, -1.0])
        wchi = np.array([1.0, 1.0])
    elif d == 3:
        w_theta = st * wt
        chi = (np.arange(n_chi) + 0.5) * (math.pi / n_chi)
        cchi = np.cos(chi)
        wchi = np.full(n_chi, 2.0 * math.pi / n_chi)
    else:
        w_theta = st ** (d - 2) * wt
        chi, wc = gauss_interval(n_chi, 0.0, math.pi)
        cchi = np.cos(chi)
        wchi = sphere_surface_area(d - 2) * np.sin(chi) ** (d - 3) * wc
    cos_t = np.repeat(ct, cchi.size)
    sin_cos = np.repeat(st, cchi.size) * np.tile(cchi, ct.size)
    weight = np.repeat(w_theta, cchi.size) * np.tile(wchi, ct.size)
    return cos_t, sin_cos, weight


def _exit_time_unit(d: int, alpha: float, xn2: float, res: _Resolution) -> float:
    """Integral of the unit-ball Green function ``G(x, .)`` over the ball.

    Polar coordinates around ``x`` (``|x|^2 = xn2``) with the substitution
    ``s = s_max * u**(1/alpha)``, which renders the radial integrand bounded.
    """
    cos_t, w_ang = _axis_rule(d, res.n_theta)
    ex = math.sqrt(xn2) * cos_t  # e . x per direction
    smax = -ex + np.sqrt(ex * ex + 1.0 - xn2)
    u, wu = composite_01(_U_BREAKS, res.n_u)
    s = smax[:, None] * u[None, :] ** (1.0 / alpha)
    yn2 = xn2 + 2.0 * s * ex[:, None] + s * s
    factor = _green_factor(d, alpha, (1.0 - xn2) * (1.0 - yn2) / (s * s))
    radial = factor @ wu
    return (
        _green_prefactor(d, alpha)
        / alpha
        * float(np.dot(w_ang, smax**alpha * radial))
    )


def _p0_contribution(
    d: int,
    alpha: float,
    an2: float,
    bn2: float,
    dist2: float,
    a_axis: float,
    a_plane: float,
    rho: float,
    res: _Resolution,
) -> float:
    """Integral of ``G(a,y) G(y,b)`` over the singular ball around ``a``.

    Geometry is passed as scalars: ``an2 = |a|^2``, ``bn2 = |b|^2``,
    ``dist2 = |a-b|^2``, ``a_axis = a . u`` with ``u = (b-a)/|b-a|``, and
    ``a_plane`` the magnitude of the component of ``a`` orthogonal to ``u``
    (inside the plane spanned by ``a`` and ``b``).  The region is
    ``B(a, rho)`` intersected with the unit ball, in polar coordinates
    around ``a`` with the exact ``s**(alpha-1)`` substitution.
    """
    dist = math.sqrt(dist2)
    cos_t, sin_cos, w_ang = _plane_direction_grid(d, res.n_theta, res.n_chi)
    ex = cos_t * a_axis + sin_cos * a_plane  # e . a
    smax = -ex + np.sqrt(ex * ex + 1.0 - an2)
    s0 = np.minimum(rho, smax)
    u, wu = composite_01(_U_BREAKS, res.n_u)
    s = s0[:, None] * u[None, :] ** (1.0 / alpha)
    yn2 = an2 + 2.0 * s * ex[:, None] + s * s
    yb2 = dist2 - 2.0 * s * (dist * cos_t)[:, None] + s * s
    factor_a = _green_factor(d, alpha, (1.0 - an2) * (1.0 - yn2) / (s * s))
    green_b = _green_from_scalars(d, alpha, yn2, bn2, yb2)
    radial = (factor_a * green_b) @ wu
    return (
        _green_prefactor(d, alpha)
        / alpha
        * float(np.dot(w_ang, s0**alpha * radial))
    )


def _three_g_unit(
    d: int, alpha: float, xn2: float, zn2: float, dist2: float, res: _Resolution
) -> float:
    """Integral of ``G(x,y) G(y,z)`` over the unit ball (one orientation).

    Region split: small balls of radius ``rho`` around both singular points
    handled by ``_p0_contribution``; the remainder integrated along rays from
    ``x`` with the chord through the ball around ``z`` excised exactly.
    """
    dist = math.sqrt(dist2)
    xdotz = 0.5 * (xn2 + zn2 - dist2)
    x_axis = (xdotz - xn2) / dist  # x . u with u = (z-x)/dist
    z_axis = x_axis + dist
    x_plane = math.sqrt(max(xn2 - x_axis * x_axis, 0.0))
    z_plane = x_plane  # z - x is parallel to the axis
    rho = min(0.1, 0.5 * dist)

    total = _p0_contribution(
        d, alpha, xn2, zn2, dist2, x_axis, x_plane, rho, res
    )
    total += _p0_contribution(
        d, alpha, zn2, xn2, dist2, -z_axis, z_plane, rho, res
    )

    # remainder: rays from x, minus the radial chunk [0, s0] and the chord
    # where the ray passes within rho of z; the radial integral has a kink
    # at the tube-grazing angle sin(theta) = rho/dist, so the polar rule
    # panels cluster there
    if res.split_theta:
        theta_t = math.asin(min(rho / dist, 1.0))
        span = math.pi - theta_t
        breaks = (
            0.0,
            0.6 * theta_t,
            0.9 * theta_t,
            theta_t,
            theta_t + 0.1 * span,
            theta_t + 0.35 * span,
            theta_t + 0.7 * span,
            math.pi,
        )
        n_per = max(5, res.n_theta // 3)
        cos_t, sin_cos, w_ang = _plane_direction_grid(
            d, n_per, res.n_chi, theta_breaks=breaks
        )
    else:
        cos_t, sin_cos, w_ang = _plane_direction_grid(d, res.n_theta, res.n_chi)
    ex = cos_t * x_axis + sin_cos * x_plane
    smax = -ex + np.sqrt(ex * ex + 1.0 - xn2)
    s0 = np.minimum(rho, smax)
    proj = dist * cos_t
    perp2 = dist2 * (1.0 - cos_t * cos_t)
    tube = (perp2 < rho * rho) & (proj > 0.0)
    half = np.where(tube, np.sqrt(np.maximum(rho * rho - perp2, 0.0)), 0.0)
    seg1_hi = np.where(tube, np.clip(proj - half, s0, smax), smax)
    seg2_lo = np.where(tube, np.clip(proj + half, s0, smax), smax)

    rel, wrel = composite_01(_S_BREAKS, res.n_s)
    pref = _green_prefactor(d, alpha)

    def segment(lo: np.ndarray, hi: np.ndarray) -> float:
        length = np.maximum(hi - lo, 0.0)
        s = lo[:, None] + length[:, None] * rel[None, :]
        ws = length[:, None] * wrel[None, :]
        yn2 = xn2 + 2.0 * s * ex[:, None] + s * s
        yz2 = dist2 - 2.0 * s * proj[:, None] + s * s
        s2 = s * s
        green_x = pref * s2 ** (0.5 * (alpha - d)) * _green_factor(
            d, alpha, (1.0 - xn2) * (1.0 - yn2) / s2
        )
        green_z = _green_from_scalars(d, alpha, yn2, zn2, yz2)
        integrand = green_x * green_z * s ** (d - 1)
        return float(np.dot(w_ang, (integrand * ws).sum(axis=1)))

    total += segment(s0, seg1_hi)
    total += segment(seg2_lo, smax)
    return total


def _conditioned_unit(
    d: int, alpha: float, xn2: float, zn2: float, dist2: float, res: _Resolution
) -> float:
    """Conditioned exit time on the unit ball from scalar geometry.

    Averages the two ray orientations so the result is exactly symmetric
    under swapping the two points.
    """
    num = 0.5 * (
        _three_g_unit(d, alpha, xn2, zn2, dist2, res)
        + _three_g_unit(d, alpha, zn2, xn2, dist2, res)
    )
    den = float(
        _green_from_scalars(
            d, alpha, np.array([xn2]), np.array([zn2]), np.array([dist2])
        )[0]
    )
    return num / den


def _refine_ladder(
    evaluate, resolutions, quad: QuadratureConfig, what: str
) -> tuple[float, float]:
    """Run ``evaluate`` at increasing resolutions until the change passes.

    Returns ``(value, est_error)`` where ``est_error`` is the difference
    between the last two resolutions.
    """
    steps = min(quad.max_subdivisions, len(resolutions) - 1)
    prev = evaluate(resolutions[0])
    for k in range(1, steps + 1):
        value = evaluate(resolutions[k])
        est = abs(value - prev)
        if quad.accepts(value, est):
            return value, est
        prev = value
    raise QuadratureDidNotConverge(
        f"{what}: resolution ladder exhausted without meeting tolerances"
    )


# --------------------------------------------------------------------------
# exit times
# --------------------------------------------------------------------------


def expected_exit_time_ball(
    params: ProcessParams,
    radius: float,
    x,
    quad: QuadratureConfig | None = None,
) -> KernelValue:
    """Expected exit time of the stable process from ``B(0, radius)``.

    Computed as the ball integral of the Green function ``G(x, .)`` by the
    polar rule with exact handling of the ``|x-y|^(alpha-d)`` singularity;
    scaling reduces the ball to unit radius (exit times scale like
    ``radius**alpha``).  The default tolerance configuration is the volume
    preset ``VOLUME_QUAD``; stricter configurations may exhaust the
    resolution ladder and raise ``QuadratureDidNotConverge``.
    """
    if quad is None:
        quad = VOLUME_QUAD
    d, alpha = params.d, params.alpha
    r = _check_radius(radius)
    xp = _as_point(x, d, "x")
    xn2 = float(xp @ xp) / (r * r)
    if xn2 >= 1.0:
        raise PointNotInterior(f"|x|={math.sqrt(xn2) * r:.6g} must be < {r}")

    value, est = _refine_ladder(
        lambda res: _exit_time_unit(d, alpha, xn2, res),
        _RES_EXIT,
        quad,
        "expected exit time",
    )
    scale = r**alpha
    return KernelValue(scale * value, scale * est)


def conditioned_exit_time_ball(
    params: ProcessParams,
    radius: float,
    x,
    z,
    quad: QuadratureConfig | None = None,
) -> KernelValue:
    """Expected exit time from ``B(0, radius)`` conditioned via ``z``.

    Evaluates ``integral_B G(x,y) G(y,z) dy / G(x,z)`` -- the expected exit
    time of the process transformed to pass through ``z`` -- by the
    region-split polar rule.  Exactly symmetric in ``(x, z)`` and scaling
    like ``radius**alpha``.  Default tolerances are the ``VOLUME_QUAD``
    preset, as for :func:`expected_exit_time_ball`.
    """
    if quad is None:
        quad = VOLUME_QUAD
    d, alpha = params.d, params.alpha
    r = _check_radius(radius)
    xp = _as_point(x, d, "x")
    zp = _as_point(z, d, "z")
    xn2 = float(xp @ xp) / (r * r)
    zn2 = float(zp @ zp) / (r * r)
    if xn2 >= 1.0:
        raise PointNotInterior(f"|x| must be < {r}")
    if zn2 >= 1.0:
        raise PointNotInterior(f"|z| must be < {r}")
    diff = xp - zp
    dist2 = float(diff @ diff) / (r * r)
    if dist2 == 0.0:
        raise CoincidentPoints("conditioned exit time requires x != z")

    value, est = _refine_ladder(
        lambda res: _conditioned_unit(d, alpha, xn2, zn2, dist2, res),
        _RES_3G,
        quad,
        "conditioned exit time",
    )
    scale = r**alpha
    return KernelValue(scale * value, scale * est)


# --------------------------------------------------------------------------
# certified comparison radius
# --------------------------------------------------------------------------

_SUP_CACHE: dict[tuple[int, float], float] = {}

#: Geometry grid for the conditioned-exit-time supremum: radial positions of
#: both points and the angle between them (the quantity is invariant under
#: rotations, so this parameterization is exhaustive).
_SUP_RADII = np.linspace(0.0, 0.975, 21)
_SUP_ANGLES = (np.arange(16) + 0.5) * (math.pi / 16.0)
_SUP_MIN_SEP = 0.02
_SUP_REFINE_TOP = 40


def _khasminskii_sup(params: ProcessParams, quad: QuadratureConfig) -> float:
    """Grid supremum of the conditioned exit time on the unit ball.

    Scans a deterministic grid of point pairs with a cheap rule, re-evaluates
    the leading candidates at the regular resolution, and refines the best
    pair through the resolution ladder.  The result is an operational
    under-approximation of the true supremum (documented: the certified
    radius derived from it is conservative).
    """
    key = (params.d, params.alpha)
    if key in _SUP_CACHE:
        return _SUP_CACHE[key]
    d, alpha = params.d, params.alpha

    geoms: list[tuple[float, float, float]] = []
    for a in _SUP_RADII:
        for b in _SUP_RADII:
            for ang in _SUP_ANGLES:
                dist2 = a * a + b * b - 2.0 * a * b * math.cos(ang)
                if dist2 < _SUP_MIN_SEP * _SUP_MIN_SEP:
                    continue
                geoms.append((a * a, b * b, dist2))

    coarse = np.array(
        [
            _three_g_unit(d, alpha, xn2, zn2, dist2, _RES_SCAN)
            / _green_from_scalars(
                d, alpha, np.array([xn2]), np.array([zn2]), np.array([dist2])
            )[0]
            for xn2, zn2, dist2 in geoms
        ]
    )
    top = np.argsort(coarse)[-_SUP_REFINE_TOP:]
    refined = np.array(
        [
            _conditioned_unit(d, alpha, *geoms[i], _RES_3G[0])
            for i in top
        ]
    )
    best = geoms[top[int(np.argmax(refined))]]
    sup_value, _ = _refine_ladder(
        lambda res: _conditioned_unit(d, alpha, *best, res),
        _RES_3G,
        quad,
        "conditioned exit time supremum",
    )
    sup = max(float(refined.max()), sup_value)
    _SUP_CACHE[key] = sup
    return sup


def compute_r0(
    params: ProcessParams,
    quad: QuadratureConfig | None = None,
    *,
    _b_scale: float = 1.0,
) -> float:
    """Certified comparison radius for the truncated process on balls.

    Returns ``min(1/4, (2 * B * S)**(-1/alpha))`` where ``B`` is
    :func:`constant_B` and ``S`` the grid supremum of the unit-ball
    conditioned exit time.  Below this radius the accumulated truncation
    penalty along any conditioned path is at most 1/2, which certifies (by
    the standard exponential-series argument) that the truncated process'
    Green function and Poisson kernel on the ball lie within a factor of 2
    of the untruncated ones.  The supremum is cached per parameter set, so
    repeated calls are cheap.

    ``_b_scale`` is an internal sensitivity hook scaling ``B``; the radius is
    nonincreasing in it.
    """
    if quad is None:
        quad = VOLUME_QUAD
    if not (_b_scale > 0.0 and math.isfinite(_b_scale)):
        raise ParamOutOfRange("_b_scale must be positive and finite")
    sup = _khasminskii_sup(params, quad)
    bound = (2.0 * _b_scale * constant_B(params) * sup) ** (-1.0 / params.alpha)
    return min(0.25, bound)


def truncated_poisson_ball_bounds(
    params: ProcessParams, radius: float, x, z
) -> tuple[float, float]:
    """Certified sandwich for the truncated process' ball exit density.

    For ``radius < compute_r0`` (strictly), the truncated process' exit
    density at ``z`` from ``B(0, radius)`` started at ``x`` lies between
    the untruncated density ``K`` and ``2 K`` whenever ``|z| < 1 - radius``
    (every interior point can reach such ``z`` in one truncated jump); beyond
    that distance only the upper bound ``2 K`` is certified and the lower
    bound degrades to 0.

    Raises ``RadiusTooLarge`` when the radius is not below the certified
    comparison radius.
    """
    d = params.d
    r = _check_radius(radius)
    limit = min(0.25, compute_r0(params))
    if r >= limit:
        raise RadiusTooLarge(
            f"radius {r} must be < min(1/4, certified comparison radius) = {limit:.6g}"
        )
    origin = np.zeros(d)
    kernel = stable_poisson_ball(params, origin, r, x, z)
    zp = _as_point(z, d, "z")
    lower = kernel if float(zp @ zp) < (1.0 - r) ** 2 else 0.0
    return lower, 2.0 * kernel

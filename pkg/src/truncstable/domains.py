"""Geometry for simulation and verification: shapes, membership, distances.

All shapes are open sets; removed obstacles (the slab of the counterexample
domain) are removed as closed sets, so membership on their faces is false.
Queries are pure: vectorized membership over point arrays
(``contains_points``) with scalar wrappers, exact boundary distances for
balls, boxes, annuli and the slab domain, and conservative (lower-bound)
distances for composites.  ``encode_shape`` flattens a shape into a
``(kind, data, cap)`` triple of plain arrays so the compiled simulator can
evaluate membership without Python objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatch,
    ParamOutOfRange,
    PointNotInterior,
)

__all__ = [
    "AnnulusSpec",
    "Annulus",
    "AxisBox",
    "Ball",
    "BallUnion",
    "BoxMinusSlab",
    "CnSet",
    "DnSet",
    "HalfspaceIntersection",
    "Intersection",
    "bounding_ball",
    "boundary_distance",
    "cn_set",
    "contains",
    "contains_points",
    "counterexample_domain",
    "dn_set",
    "encode_shape",
    "KIND_ANNULUS",
    "KIND_BALL",
    "KIND_BALL_UNION",
    "KIND_BOX",
    "KIND_BOX_MINUS_SLAB",
    "KIND_POLYTOPE",
]


def _freeze(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ParamOutOfRange("coordinates must be finite")
    arr.flags.writeable = False
    return arr


def _as_points(pts, dim: int) -> np.ndarray:
    """Validate and reshape ``pts`` to an ``(m, dim)`` float array."""
    arr = np.asarray(pts, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatch(
            f"expected points of dimension {dim}, got shape {arr.shape}"
        )
    return arr


# --------------------------------------------------------------------------
# shape types
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ball:
    """Open ball ``{|p - center| < radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _freeze(self.center))
        if self.center.ndim != 1 or self.center.size < 1:
            raise ParamOutOfRange("ball center must be a coordinate vector")
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ParamOutOfRange("ball radius must be positive and finite")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class Annulus:
    """Open annulus ``{r_inner < |p - center| < r_outer}``."""

    center: np.ndarray
    r_inner: float
    r_outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", _freeze(self.center))
        if not (0.0 < self.r_inner < self.r_outer and math.isfinite(self.r_outer)):
            raise ParamOutOfRange("annulus needs 0 < r_inner < r_outer < inf")

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class AnnulusSpec:
    """Annular target ``{r_inner <= |y - center| < r_outer}``.

    Unlike the open ``Annulus`` shape this has a closed inner edge and may
    have ``r_inner = 0`` (a punctured-ball shell), matching the convention
    used for exit-position targets.
    """

    center: np.ndarray
    r_inner: float
    r_outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", _freeze(self.center))
        if not (0.0 <= self.r_inner < self.r_outer and math.isfinite(self.r_outer)):
            raise ParamOutOfRange("annular target needs 0 <= r_inner < r_outer < inf")

    @property
    def dim(self) -> int:
        return self.center.size

    def contains_points(self, pts) -> np.ndarray:
        p = _as_points(pts, self.dim)
        q = np.linalg.norm(p - self.center, axis=1)
        return (self.r_inner <= q) & (q < self.r_outer)

    def contains(self, p) -> bool:
        return bool(self.contains_points(p)[0])


@dataclass(frozen=True, eq=False)
class AxisBox:
    """Open axis-aligned box ``{low < p < high componentwise}``."""

    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "low", _freeze(self.low))
        object.__setattr__(self, "high", _freeze(self.high))
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ParamOutOfRange("box corners must be vectors of equal length")
        if not np.all(self.low < self.high):
            raise ParamOutOfRange("box needs low < high componentwise")

    @property
    def dim(self) -> int:
        return self.low.size


@dataclass(frozen=True, eq=False)
class HalfspaceIntersection:
    """Open convex polytope ``{n_i . p < offset_i for all i}``.

    Normals are normalized to unit length at construction (so face offsets
    are signed distances from the origin).  A caller-supplied strict
    interior point certifies nonempty interior; no feasibility problem is
    solved here.
    """

    normals: np.ndarray
    offsets: np.ndarray
    interior_point: np.ndarray

    def __post_init__(self):
        normals = np.array(self.normals, dtype=float)
        offsets = np.array(self.offsets, dtype=float)
        interior = _freeze(self.interior_point)
        if normals.ndim != 2 or offsets.ndim != 1 or len(normals) != len(offsets):
            raise ParamOutOfRange("need matching lists of face normals and offsets")
        if normals.shape[1] != interior.size:
            raise DimensionMismatch("face normals and interior point disagree on d")
        norms = np.linalg.norm(normals, axis=1)
        if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
            raise ParamOutOfRange("face normals must be nonzero and finite")
        normals = normals / norms[:, None]
        offsets = offsets / norms
        if not np.all(normals @ interior < offsets):
            raise ParamOutOfRange("interior point is not strictly inside all faces")
        normals.flags.writeable = False
        offsets.flags.writeable = False
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "interior_point", interior)

    @property
    def dim(self) -> int:
        return self.normals.shape[1]


@dataclass(frozen=True, eq=False)
class BoxMinusSlab:
    """Open box with a closed slab removed.

    The slab must reach the box boundary in the first ``d - 1`` coordinates
    on its low side, stop strictly short of the box on its high side, and
    sit strictly inside the box in the last coordinate, so the remaining
    open set is connected with the slab's top, bottom, and far face as
    genuine interior boundary.
    """

    box: AxisBox
    slab: AxisBox

    def __post_init__(self):
        box, slab = self.box, self.slab
        if box.dim != slab.dim:
            raise DimensionMismatch("box and slab dimensions differ")
        d = box.dim
        if d < 2:
            raise ParamOutOfRange("slab removal needs d >= 2")
        if not np.all(slab.low[: d - 1] == box.low[: d - 1]):
            raise ParamOutOfRange("slab must reach the box on its low faces")
        if not np.all(slab.high[: d - 1] < box.high[: d - 1]):
            raise ParamOutOfRange("slab must stop strictly inside the box")
        if not (box.low[d - 1] < slab.low[d - 1] < slab.high[d - 1] < box.high[d - 1]):
            raise ParamOutOfRange("slab must sit strictly inside the box vertically")

    @property
    def dim(self) -> int:
        return self.box.dim


@dataclass(frozen=True, eq=False)
class Intersection:
    """Intersection of an arbitrary shape with an open ball."""

    shape: "DomainShape"
    ball: Ball

    def __post_init__(self):
        if self.shape.dim != self.ball.dim:
            raise DimensionMismatch("shape and ball dimensions differ")

    @property
    def dim(self) -> int:
        return self.ball.dim


@dataclass(frozen=True, eq=False)
class BallUnion:
    """Union of open balls (used for two-ball harmonicity domains)."""

    balls: tuple[Ball, ...]

    def __post_init__(self):
        balls = tuple(self.balls)
        if not balls:
            raise ParamOutOfRange("ball union needs at least one ball")
        if len({b.dim for b in balls}) != 1:
            raise DimensionMismatch("balls in a union must share a dimension")
        object.__setattr__(self, "balls", balls)

    @property
    def dim(self) -> int:
        return self.balls[0].dim


DomainShape = (
    Ball
    | Annulus
    | AxisBox
    | HalfspaceIntersection
    | BoxMinusSlab
    | Intersection
    | BallUnion
)


# --------------------------------------------------------------------------
# membership
# --------------------------------------------------------------------------


def _slab_excess(slab: AxisBox, pts: np.ndarray) -> np.ndarray:
    """Componentwise distance excess of ``pts`` outside the closed slab."""
    return np.maximum(np.maximum(slab.low - pts, pts - slab.high), 0.0)


def contains_points(shape: DomainShape, pts) -> np.ndarray:
    """Vectorized open-set membership for an ``(m, d)`` array of points."""
    p = _as_points(pts, shape.dim)
    if isinstance(shape, Ball):
        return np.einsum("ij,ij->i", p - shape.center, p - shape.center) < (
            shape.radius * shape.radius
        )
    if isinstance(shape, Annulus):
        q = np.einsum("ij,ij->i", p - shape.center, p - shape.center)
        return (shape.r_inner * shape.r_inner < q) & (q < shape.r_outer * shape.r_outer)
    if isinstance(shape, AxisBox):
        return np.all((shape.low < p) & (p < shape.high), axis=1)
    if isinstance(shape, HalfspaceIntersection):
        return np.all(p @ shape.normals.T < shape.offsets, axis=1)
    if isinstance(shape, BoxMinusSlab):
        in_box = np.all((shape.box.low < p) & (p < shape.box.high), axis=1)
        in_slab = np.all(_slab_excess(shape.slab, p) == 0.0, axis=1)
        return in_box & ~in_slab
    if isinstance(shape, Intersection):
        return contains_points(shape.shape, p) & contains_points(shape.ball, p)
    if isinstance(shape, BallUnion):
        out = np.zeros(len(p), dtype=bool)
        for b in shape.balls:
            out |= contains_points(b, p)
        return out
    raise ConfigError(f"unknown shape type {type(shape).__name__}")


def contains(shape: DomainShape, p) -> bool:
    """True iff ``p`` lies in the open set ``shape``."""
    return bool(contains_points(shape, p)[0])


# --------------------------------------------------------------------------
# boundary distance
# --------------------------------------------------------------------------


def boundary_distance(shape: DomainShape, p) -> float:
    """Positive lower bound on the distance from interior ``p`` to the boundary.

    Exact for balls, annuli, boxes, and the slab domain; for polytopes it is
    the minimum face distance and for composites the minimum (union:
    maximum) over parts — always a valid lower bound.
    """
    if not contains(shape, p):
        raise PointNotInterior("boundary_distance requires an interior point")
    return _boundary_distance_unchecked(shape, np.asarray(p, dtype=float))


def _boundary_distance_unchecked(shape: DomainShape, p: np.ndarray) -> float:
    if isinstance(shape, Ball):
        return shape.radius - float(np.linalg.norm(p - shape.center))
    if isinstance(shape, Annulus):
        rho = float(np.linalg.norm(p - shape.center))
        return min(shape.r_outer - rho, rho - shape.r_inner)
    if isinstance(shape, AxisBox):
        return float(np.min(np.minimum(p - shape.low, shape.high - p)))
    if isinstance(shape, HalfspaceIntersection):
        return float(np.min(shape.offsets - shape.normals @ p))
    if isinstance(shape, BoxMinusSlab):
        d_box = float(
            np.min(np.minimum(p - shape.box.low, shape.box.high - p))
        )
        d_slab = float(np.linalg.norm(_slab_excess(shape.slab, p[None, :])[0]))
        return min(d_box, d_slab)
    if isinstance(shape, Intersection):
        return min(
            _boundary_distance_unchecked(shape.shape, p),
            _boundary_distance_unchecked(shape.ball, p),
        )
    if isinstance(shape, BallUnion):
        # inside a union, every boundary point within the distance-to-edge of
        # any covering ball is interior to that ball, so the max is a bound
        best = 0.0
        for b in shape.balls:
            gap = b.radius - float(np.linalg.norm(p - b.center))
            if gap > best:
                best = gap
        return best
    raise ConfigError(f"unknown shape type {type(shape).__name__}")


# --------------------------------------------------------------------------
# bounding ball
# --------------------------------------------------------------------------


def bounding_ball(shape: DomainShape) -> tuple[np.ndarray, float]:
    """A ball containing the shape: minimal for balls, circumscribed for boxes.

    Polytopes are bounded through per-coordinate linear programs (raises
    ``ParamOutOfRange`` if the polytope is unbounded); an intersection
    reports the smaller of its parts' candidates.
    """
    if isinstance(shape, Ball):
        return shape.center.copy(), shape.radius
    if isinstance(shape, Annulus):
        return shape.center.copy(), shape.r_outer
    if isinstance(shape, AxisBox):
        mid = 0.5 * (shape.low + shape.high)
        return mid, float(np.linalg.norm(shape.high - mid))
    if isinstance(shape, HalfspaceIntersection):
        return _polytope_bounding_ball(shape)
    if isinstance(shape, BoxMinusSlab):
        return bounding_ball(shape.box)
    if isinstance(shape, Intersection):
        c1, r1 = bounding_ball(shape.shape)
        c2, r2 = bounding_ball(shape.ball)
        return (c1, r1) if r1 <= r2 else (c2, r2)
    if isinstance(shape, BallUnion):
        centers = np.array([b.center for b in shape.balls])
        mid = centers.mean(axis=0)
        radius = max(
            float(np.linalg.norm(b.center - mid)) + b.radius for b in shape.balls
        )
        return mid, radius
    raise ConfigError(f"unknown shape type {type(shape).__name__}")


def _polytope_bounding_ball(shape: HalfspaceIntersection) -> tuple[np.ndarray, float]:
    from scipy.optimize import linprog

    d = shape.dim
    lo = np.empty(d)
    hi = np.empty(d)
    for i in range(d):
        c = np.zeros(d)
        for sign, out in ((1.0, lo), (-1.0, hi)):
            c[i] = sign
            res = linprog(
                c,
                A_ub=shape.normals,
                b_ub=shape.offsets,
                bounds=[(None, None)] * d,
                method="highs",
            )
            if res.status != 0:
                raise ParamOutOfRange(
                    "polytope must be bounded to admit a bounding ball"
                )
            out[i] = sign * res.fun
        c[i] = 0.0
    mid = 0.5 * (lo + hi)
    return mid, float(np.linalg.norm(hi - mid))


# --------------------------------------------------------------------------
# counterexample geometry
# --------------------------------------------------------------------------


def counterexample_domain(d: int) -> BoxMinusSlab:
    """Box ``(-100, 100)^d`` with the closed slab
    ``(-100, 50]^{d-1} x [-1/2, 0]`` removed.

    The origin lies on the slab's top face, so it is a boundary point of the
    domain; the region above the slab is connected to the rest around the
    slab's far edge at 50.
    """
    if not (isinstance(d, (int, np.integer)) and d >= 2):
        raise ParamOutOfRange("counterexample domain needs integer d >= 2")
    box = AxisBox(np.full(d, -100.0), np.full(d, 100.0))
    slab_low = np.full(d, -100.0)
    slab_high = np.full(d, 50.0)
    slab_low[-1] = -0.5
    slab_high[-1] = 0.0
    return BoxMinusSlab(box, AxisBox(slab_low, slab_high))


def _validate_cn_args(d: int, r1: float, n: int) -> None:
    if not (isinstance(d, (int, np.integer)) and d >= 2):
        raise ParamOutOfRange("need integer d >= 2")
    if not (0.0 < r1 < 0.5):
        raise ParamOutOfRange("need 0 < r1 < 1/2")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParamOutOfRange("need integer n >= 1")


@dataclass(frozen=True, eq=False)
class CnSet:
    """Deep cylinder at the bottom of the counterexample domain.

    ``C_n = {x in D : |x_tilde| <= r1/8, x_d <= -1 + 2^(-n) r1^2}`` where
    ``x_tilde`` collects the first ``d - 1`` coordinates.  Membership is
    closed on the cylinder's side and top; the exact Euclidean distance to
    the set is exposed because the companion set is defined through it.
    """

    d: int
    r1: float
    n: int
    top: float = field(init=False)

    def __post_init__(self):
        _validate_cn_args(self.d, self.r1, self.n)
        object.__setattr__(self, "top", -1.0 + 2.0**-self.n * self.r1 * self.r1)

    @property
    def dim(self) -> int:
        return self.d

    def contains_points(self, pts) -> np.ndarray:
        p = _as_points(pts, self.d)
        lateral = np.linalg.norm(p[:, :-1], axis=1) <= self.r1 / 8.0
        vertical = (p[:, -1] <= self.top) & (p[:, -1] > -100.0)
        return lateral & vertical

    def contains(self, p) -> bool:
        return bool(self.contains_points(p)[0])

    def distance_points(self, pts) -> np.ndarray:
        """Exact Euclidean distance from each point to the closed cylinder."""
        p = _as_points(pts, self.d)
        lateral = np.maximum(np.linalg.norm(p[:, :-1], axis=1) - self.r1 / 8.0, 0.0)
        vertical = np.maximum(
            np.maximum(p[:, -1] - self.top, -100.0 - p[:, -1]), 0.0
        )
        return np.hypot(lateral, vertical)

    def distance(self, p) -> float:
        return float(self.distance_points(p)[0])


@dataclass(frozen=True, eq=False)
class DnSet:
    """Points of the counterexample domain above the slab and within unit
    reach of the deep cylinder: ``D_n = {y in D : y_d > 0, dist(y, C_n) < 1}``.
    """

    d: int
    r1: float
    n: int
    cn: CnSet = field(init=False)
    domain: BoxMinusSlab = field(init=False)

    def __post_init__(self):
        _validate_cn_args(self.d, self.r1, self.n)
        object.__setattr__(self, "cn", CnSet(self.d, self.r1, self.n))
        object.__setattr__(self, "domain", counterexample_domain(self.d))

    @property
    def dim(self) -> int:
        return self.d

    def contains_points(self, pts) -> np.ndarray:
        p = _as_points(pts, self.d)
        above = p[:, -1] > 0.0
        near = self.cn.distance_points(p) < 1.0
        return contains_points(self.domain, p) & above & near

    def contains(self, p) -> bool:
        return bool(self.contains_points(p)[0])


def cn_set(d: int, r1: float, n: int) -> CnSet:
    """Membership predicate for the deep cylinder ``C_n``."""
    return CnSet(d, r1, n)


def dn_set(d: int, r1: float, n: int) -> DnSet:
    """Membership predicate for the near-cylinder upper region ``D_n``."""
    return DnSet(d, r1, n)


# --------------------------------------------------------------------------
# flat encoding for the compiled simulator
# --------------------------------------------------------------------------

KIND_BALL = 0
KIND_ANNULUS = 1
KIND_BOX = 2
KIND_POLYTOPE = 3
KIND_BOX_MINUS_SLAB = 4
KIND_BALL_UNION = 5

_NO_CAP_RADIUS = -1.0


def encode_shape(shape: DomainShape) -> tuple[int, np.ndarray, np.ndarray]:
    """Flatten a shape into ``(kind, data, cap)`` plain float arrays.

    ``cap`` is a ``[center..., radius]`` ball restriction with negative
    radius meaning no restriction; an ``Intersection`` contributes its ball
    as the cap of its base shape (bases may not themselves be
    intersections — compose geometry before encoding).
    """
    d = shape.dim
    cap = np.zeros(d + 1)
    cap[-1] = _NO_CAP_RADIUS
    if isinstance(shape, Intersection):
        if isinstance(shape.shape, Intersection):
            raise ConfigError("nested intersections are not encodable; flatten first")
        kind, data, _ = encode_shape(shape.shape)
        cap[:-1] = shape.ball.center
        cap[-1] = shape.ball.radius
        return kind, data, cap
    if isinstance(shape, Ball):
        return KIND_BALL, np.concatenate([shape.center, [shape.radius]]), cap
    if isinstance(shape, Annulus):
        return (
            KIND_ANNULUS,
            np.concatenate([shape.center, [shape.r_inner, shape.r_outer]]),
            cap,
        )
    if isinstance(shape, AxisBox):
        return KIND_BOX, np.concatenate([shape.low, shape.high]), cap
    if isinstance(shape, HalfspaceIntersection):
        rows = np.concatenate([shape.normals, shape.offsets[:, None]], axis=1)
        data = np.concatenate([[float(len(rows))], rows.ravel()])
        return KIND_POLYTOPE, data, cap
    if isinstance(shape, BoxMinusSlab):
        data = np.concatenate(
            [shape.box.low, shape.box.high, shape.slab.low, shape.slab.high]
        )
        return KIND_BOX_MINUS_SLAB, data, cap
    if isinstance(shape, BallUnion):
        rows = np.array(
            [np.concatenate([b.center, [b.radius]]) for b in shape.balls]
        )
        data = np.concatenate([[float(len(rows))], rows.ravel()])
        return KIND_BALL_UNION, data, cap
    raise ConfigError(f"unknown shape type {type(shape).__name__}")

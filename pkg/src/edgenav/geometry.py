"""Planar geometry: distances, hulls, proxemic egg boundaries, bearing extremes.

All operations are pure functions over immutable inputs. Points are length-2
float arrays (anything array-like is accepted); polygons are small vertex
arrays wrapped in :class:`Pentagon` or :class:`ConvexHullShape`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Degeneracy tolerance for coincidence / collinearity tests, in meters.
GEOM_EPS = 1e-9


class GroupSurroundsRobot(ValueError):
    """A point set spans >= pi radians as seen from the reference position."""


class DegenerateKeypoint(ValueError):
    """A key point coincides with the reference position."""


def as_point(p) -> np.ndarray:
    """Validate and convert a single 2-D point to a float array."""
    q = np.asarray(p, dtype=float).reshape(-1)
    if q.shape != (2,) or not np.all(np.isfinite(q)):
        raise ValueError(f"expected a finite 2-D point, got {p!r}")
    return q


def as_points(pts) -> np.ndarray:
    """Validate and convert a sequence of 2-D points to an (n, 2) array."""
    q = np.asarray(pts, dtype=float)
    if q.size == 0:
        return q.reshape(0, 2)
    q = np.atleast_2d(q)
    if q.ndim != 2 or q.shape[1] != 2 or not np.all(np.isfinite(q)):
        raise ValueError("expected a finite (n, 2) point array")
    return q


def wrap_angle(a):
    """Wrap angle(s) into [-pi, pi)."""
    return np.mod(np.asarray(a, dtype=float) + np.pi, 2.0 * np.pi) - np.pi


def _cross2(o, a, b) -> float:
    """z-component of (a - o) x (b - o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class EggParams:
    """Asymmetric personal-space profile around a walking entity.

    The boundary is a closed curve elongated ahead of the entity in
    proportion to its speed and slightly flattened on the sides and rear.
    With ``speed == 0`` and both ratios at 1 the curve is a circle of
    ``base_radius``.
    """

    base_radius: float = 0.5   # m
    front_gain: float = 0.4    # s: extra forward extent per unit speed
    side_ratio: float = 0.9    # in (0, 1]
    rear_ratio: float = 0.8    # in (0, 1]

    def __post_init__(self):
        if self.base_radius <= 0.0:
            raise ValueError("base_radius must be positive")
        if self.front_gain < 0.0:
            raise ValueError("front_gain must be >= 0")
        for name in ("side_ratio", "rear_ratio"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")


@dataclass(frozen=True, eq=False)
class Pentagon:
    """Group space over 5 named vertices: (p_l, p_c, p_r, p_ro, p_lo)."""

    vertices: np.ndarray  # (5, 2)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (5, 2) or not np.all(np.isfinite(v)):
            raise ValueError("pentagon needs 5 finite 2-D vertices")
        object.__setattr__(self, "vertices", v)
        if not is_simple_polygon(v):
            raise ValueError("pentagon is self-intersecting")

    @property
    def p_l(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def p_c(self) -> np.ndarray:
        return self.vertices[1]

    @property
    def p_r(self) -> np.ndarray:
        return self.vertices[2]

    @property
    def p_ro(self) -> np.ndarray:
        return self.vertices[3]

    @property
    def p_lo(self) -> np.ndarray:
        return self.vertices[4]


@dataclass(frozen=True, eq=False)
class ConvexHullShape:
    """Convex polygon, counter-clockwise vertices; 1 and 2 vertex shapes allowed."""

    vertices: np.ndarray  # (n, 2), n >= 1

    def __post_init__(self):
        v = as_points(self.vertices)
        if v.shape[0] < 1:
            raise ValueError("hull needs at least one vertex")
        object.__setattr__(self, "vertices", v)
        n = v.shape[0]
        if n >= 3:
            # Convex position, CCW; no three consecutive collinear vertices.
            for i in range(n):
                c = _cross2(v[i], v[(i + 1) % n], v[(i + 2) % n])
                if c <= GEOM_EPS:
                    raise ValueError("hull vertices not in strict CCW convex position")


def polygon_vertices(poly) -> np.ndarray:
    """Vertex array of a Pentagon, ConvexHullShape, or raw array."""
    if isinstance(poly, (Pentagon, ConvexHullShape)):
        return poly.vertices
    return as_points(poly)


def is_simple_polygon(vertices) -> bool:
    """True if the closed polygon has no properly-crossing edges.

    Zero-length edges and edges that merely touch at shared endpoints are
    tolerated, so collapsed (degenerate) shapes count as simple.
    """
    v = as_points(vertices)
    n = v.shape[0]
    edges = [(v[i], v[(i + 1) % n]) for i in range(n)]

    def proper_cross(p1, p2, p3, p4) -> bool:
        d1 = _cross2(p3, p4, p1)
        d2 = _cross2(p3, p4, p2)
        d3 = _cross2(p1, p2, p3)
        d4 = _cross2(p1, p2, p4)
        e = GEOM_EPS
        return ((d1 > e and d2 < -e) or (d1 < -e and d2 > e)) and (
            (d3 > e and d4 < -e) or (d3 < -e and d4 > e)
        )

    for i in range(n):
        a1, b1 = edges[i]
        if np.hypot(*(b1 - a1)) < GEOM_EPS:
            continue
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # adjacent around the wrap
            a2, b2 = edges[j]
            if np.hypot(*(b2 - a2)) < GEOM_EPS:
                continue
            if proper_cross(a1, b1, a2, b2):
                return False
    return True


def point_segment_distance(p, a, b) -> float:
    """Minimum distance from point p to segment a-b.

    Degenerate segments (a == b) reduce to point-to-point distance.
    """
    p, a, b = as_point(p), as_point(a), as_point(b)
    ab = b - a
    denom = float(ab @ ab)
    if denom < GEOM_EPS * GEOM_EPS:
        return float(np.hypot(*(p - a)))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.hypot(*(p - (a + t * ab))))


def points_segments_distance(points: np.ndarray, va: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """Distances from points (..., 2) to each of E segments; returns (..., E)."""
    d = vb - va                                      # (E, 2)
    denom = np.einsum("ej,ej->e", d, d)              # (E,)
    rel = points[..., None, :] - va                  # (..., E, 2)
    t = np.einsum("...ej,ej->...e", rel, d)
    safe = np.maximum(denom, GEOM_EPS * GEOM_EPS)
    t = np.where(denom > GEOM_EPS * GEOM_EPS, t / safe, 0.0)
    t = np.clip(t, 0.0, 1.0)
    foot = va + t[..., None] * d
    return np.linalg.norm(points[..., None, :] - foot, axis=-1)


def points_in_polygon(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Even-odd containment test for points (..., 2); boundary points unspecified."""
    x = points[..., 0]
    y = points[..., 1]
    n = vertices.shape[0]
    inside = np.zeros(x.shape, dtype=bool)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        cond = (y1 > y) != (y2 > y)
        if abs(y2 - y1) < GEOM_EPS:
            continue
        xi = (x2 - x1) * (y - y1) / (y2 - y1) + x1
        inside ^= cond & (x < xi)
    return inside


def polygon_distance_batch(points: np.ndarray, poly) -> np.ndarray:
    """Distances from points (..., 2) to a polygon; 0 inside or on the boundary."""
    v = polygon_vertices(poly)
    n = v.shape[0]
    if n == 1:
        return np.linalg.norm(points - v[0], axis=-1)
    va = v
    vb = np.roll(v, -1, axis=0)
    if n == 2:
        va, vb = va[:1], vb[:1]
    dist = points_segments_distance(points, va, vb).min(axis=-1)
    if n >= 3:
        dist = np.where(points_in_polygon(points, v), 0.0, dist)
    return dist


def point_polygon_distance(p, poly) -> float:
    """Distance from p to the occupied polygon region (0 for interior points)."""
    return float(polygon_distance_batch(as_point(p)[None, :], poly)[0])


def convex_hull(points) -> ConvexHullShape:
    """Minimal convex polygon containing the input points (monotone chain).

    Collinear boundary points are dropped. 1- and 2-point inputs yield
    degenerate shapes that the distance operations handle.
    """
    pts = as_points(points)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    pts = np.unique(pts, axis=0)  # lexicographic sort + dedup
    if pts.shape[0] == 1:
        return ConvexHullShape(pts)
    if pts.shape[0] == 2:
        return ConvexHullShape(pts)

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-2], out[-1], p) <= GEOM_EPS:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    verts = np.array(lower[:-1] + upper[:-1])
    if verts.shape[0] < 3:
        # All points collinear: keep the two extreme endpoints.
        return ConvexHullShape(np.array([lower[0], lower[-1]]))
    return ConvexHullShape(verts)


def egg_radius(phi, speed: float, params: EggParams) -> np.ndarray:
    """Radial profile of the egg at body-frame angle(s) phi (0 = heading)."""
    if speed < 0.0:
        raise ValueError("speed must be >= 0")
    phi = np.asarray(phi, dtype=float)
    c = np.maximum(0.0, np.cos(phi))
    front = 1.0 - params.rear_ratio + params.front_gain * speed / params.base_radius
    r_axis = params.base_radius * (params.rear_ratio + front * c)
    w = np.abs(np.sin(phi))
    return (1.0 - w) * r_axis + w * params.side_ratio * params.base_radius


def egg_boundary(center, heading: float, speed: float, params: EggParams, n: int = 36) -> np.ndarray:
    """Sample n boundary points of the egg-shaped personal space.

    Points are taken at uniform body-frame angles starting along the heading,
    so rotating the heading rotates the whole sample set about the center.
    """
    if n < 8:
        raise ValueError("need at least 8 boundary samples")
    center = as_point(center)
    phi = 2.0 * np.pi * np.arange(n) / n
    r = egg_radius(phi, speed, params)
    ang = heading + phi
    return center + np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def _extreme_indices(points: np.ndarray, robot: np.ndarray) -> tuple[int, int]:
    rel = points - robot
    dist = np.linalg.norm(rel, axis=1)
    if np.any(dist < GEOM_EPS):
        raise ValueError("point coincides with robot")
    bearings = np.arctan2(rel[:, 1], rel[:, 0])
    mean = np.arctan2(np.sin(bearings).mean(), np.cos(bearings).mean())
    relb = wrap_angle(bearings - mean)
    if relb.max() - relb.min() >= np.pi:
        raise GroupSurroundsRobot("group surrounds robot")

    def pick(extreme_mask):
        idx = np.flatnonzero(extreme_mask)
        return int(idx[np.argmin(dist[idx])])  # tie: smaller range, then lower index

    left = pick(relb >= relb.max() - 1e-12)
    right = pick(relb <= relb.min() + 1e-12)
    return left, right


def angular_extreme_indices(points, robot) -> tuple[int, int]:
    """Indices of the (leftmost, rightmost) points by bearing from robot.

    Bearings are unwrapped about their circular mean so sets straddling the
    +/-pi cut are handled. Raises :class:`GroupSurroundsRobot` when the
    angular span reaches pi.
    """
    return _extreme_indices(as_points(points), as_point(robot))


def angular_extremes(points, robot) -> tuple[np.ndarray, np.ndarray]:
    """The (leftmost, rightmost) points as seen from robot."""
    pts = as_points(points)
    il, ir = _extreme_indices(pts, as_point(robot))
    return pts[il].copy(), pts[ir].copy()

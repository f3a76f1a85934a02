"""Simulated 2D LiDAR and augmented entity states for pedestrians and scans.

The scan model projects rays from the robot at fixed angular resolution,
registers the nearest circle intersection per ray, and injects uniform noise
into each hit's x and y coordinates. Scan-point velocities come from
frame-to-frame cluster association rather than per-point tracking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import ClusterLabeling, associate_centroids, dbscan, filter_large_clusters
from .geometry import as_point


class SensorOccluded(RuntimeError):
    """The scan origin lies inside an obstacle circle."""


@dataclass(frozen=True)
class LidarConfig:
    angular_resolution: float = 0.25   # degrees between rays
    max_range: float = 20.0            # m
    noise_half_width: float = 0.05     # m, uniform +/- per axis
    pedestrian_radius: float = 0.5     # m
    fov: float = 360.0                 # degrees

    def __post_init__(self):
        if self.angular_resolution <= 0.0:
            raise ValueError("angular_resolution must be positive")
        if self.noise_half_width < 0.0:
            raise ValueError("noise_half_width must be >= 0")

    @property
    def n_rays(self) -> int:
        return int(round(self.fov / self.angular_resolution))


@dataclass
class Scan:
    """One LiDAR frame: hit points sorted by ray bearing."""

    timestamp: float
    origin: np.ndarray        # (2,)
    points: np.ndarray        # (m, 2)


@dataclass(frozen=True)
class AugmentedEntity:
    """Position, heading, and speed of a pedestrian or scan point."""

    position: np.ndarray      # (2,)
    heading: float            # radians in [0, 2*pi)
    speed: float              # m/s, >= 0
    source: int               # pedestrian id or scan-cluster id


def _normalize_heading(h: float) -> float:
    return float(np.mod(h, 2.0 * np.pi))


def make_entity(position, velocity, source: int) -> AugmentedEntity:
    """Entity from a velocity vector; heading 0 and speed 0 for zero velocity."""
    v = np.asarray(velocity, dtype=float)
    speed = float(np.hypot(v[0], v[1]))
    heading = _normalize_heading(float(np.arctan2(v[1], v[0]))) if speed > 0.0 else 0.0
    return AugmentedEntity(position=as_point(position), heading=heading, speed=speed, source=int(source))


def entity_velocity(e: AugmentedEntity) -> np.ndarray:
    return e.speed * np.array([np.cos(e.heading), np.sin(e.heading)])


def simulate_scan(robot, pedestrians, cfg: LidarConfig, rng_seed: int) -> Scan:
    """Ray-cast a scan of circle obstacles; deterministic for a fixed seed.

    pedestrians: sequence of (center, radius) pairs. Rays with no hit within
    max_range produce no point. Raises :class:`SensorOccluded` if the robot
    sits inside any circle.
    """
    robot = as_point(robot)
    centers = np.array([as_point(c) for c, _ in pedestrians]).reshape(-1, 2)
    radii = np.array([float(r) for _, r in pedestrians])
    if centers.shape[0]:
        if np.any(np.linalg.norm(centers - robot, axis=1) <= radii):
            raise SensorOccluded("sensor origin occluded")

    n_rays = cfg.n_rays
    bearings = np.deg2rad(cfg.angular_resolution) * np.arange(n_rays)
    if centers.shape[0] == 0:
        return Scan(timestamp=0.0, origin=robot, points=np.empty((0, 2)))

    dirs = np.column_stack((np.cos(bearings), np.sin(bearings)))   # (R, 2)
    oc = centers - robot                                           # (P, 2)
    # Ray r, circle p: t^2 - 2 t (d_r . oc_p) + |oc_p|^2 - radius_p^2 = 0
    proj = dirs @ oc.T                                             # (R, P)
    cc = np.einsum("pj,pj->p", oc, oc)                             # (P,)
    disc = proj * proj - (cc - radii * radii)[None, :]
    t = np.where(disc >= 0.0, proj - np.sqrt(np.maximum(disc, 0.0)), np.inf)
    t = np.where(t > 0.0, t, np.inf)
    t_near = t.min(axis=1)                                         # nearest hit per ray
    hit = t_near <= cfg.max_range

    points = robot + t_near[hit, None] * dirs[hit]
    if cfg.noise_half_width > 0.0 and points.shape[0]:
        rng = np.random.default_rng(rng_seed)
        points = points + rng.uniform(-cfg.noise_half_width, cfg.noise_half_width, size=points.shape)
    return Scan(timestamp=0.0, origin=robot, points=points)


def augment_scan(
    scan_t: Scan,
    scan_prev: Scan | None,
    eps: float,
    dt: float,
    max_extent: float,
    min_pts: int = 1,
    gating_radius: float = 1.0,
) -> list[AugmentedEntity]:
    """Cluster a scan, drop large static clusters, and attach cluster velocities.

    Velocities come from nearest-centroid association against the previous
    scan's (equally filtered) clustering; with no previous scan all speeds
    are zero.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if scan_t.points.shape[0] == 0:
        return []
    labeling = filter_large_clusters(dbscan(scan_t.points, eps, min_pts), scan_t.points, max_extent)
    if scan_prev is not None and scan_prev.points.shape[0]:
        prev = filter_large_clusters(dbscan(scan_prev.points, eps, min_pts), scan_prev.points, max_extent)
    else:
        prev = ClusterLabeling(labels=np.empty(0, dtype=int))
    velocities = associate_centroids(labeling, prev, dt, gating_radius)

    entities = []
    for i, label in enumerate(labeling.labels):
        if label < 0:
            continue
        entities.append(make_entity(scan_t.points[i], velocities[int(label)], int(label)))
    return entities


def augment_pedestrians(current, previous, dt: float) -> list[AugmentedEntity]:
    """Perfect-perception entities via id-matched finite differencing.

    current/previous: sequences of (id, position). Ids absent from the
    previous frame get speed 0.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    prev_pos = {}
    for pid, pos in previous or []:
        prev_pos[int(pid)] = as_point(pos)
    seen: set[int] = set()
    entities = []
    for pid, pos in current:
        pid = int(pid)
        if pid in seen:
            raise ValueError("duplicate pedestrian id")
        seen.add(pid)
        pos = as_point(pos)
        if pid in prev_pos:
            v = (pos - prev_pos[pid]) / dt
        else:
            v = np.zeros(2)
        entities.append(make_entity(pos, v, pid))
    return entities


def write_scan_log(path, scans) -> None:
    """JSON-lines scan log: one record {t, origin, points} per frame, 6 decimals."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for scan in scans:
            rec = {
                "t": round(float(scan.timestamp), 6),
                "origin": [round(float(v), 6) for v in scan.origin],
                "points": [[round(float(x), 6), round(float(y), 6)] for x, y in scan.points],
            }
            f.write(json.dumps(rec) + "\n")


def read_scan_log(path) -> list[Scan]:
    scans = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            scans.append(
                Scan(
                    timestamp=float(rec["t"]),
                    origin=np.asarray(rec["origin"], dtype=float),
                    points=np.asarray(rec["points"], dtype=float).reshape(-1, 2),
                )
            )
    return scans

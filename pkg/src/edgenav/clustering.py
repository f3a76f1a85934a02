"""Deterministic DBSCAN plus frame-to-frame cluster association.

Iteration follows input index order throughout, so labelings are reproducible
for identical inputs — a requirement for the benchmark harness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

NOISE = -1


@dataclass
class ClusterLabeling:
    """Per-point labels (-1 = noise) with per-cluster centroids and sizes."""

    labels: np.ndarray                      # (n,), int
    centroids: dict[int, np.ndarray] = field(default_factory=dict)
    sizes: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_labels(cls, points: np.ndarray, labels: np.ndarray) -> "ClusterLabeling":
        labels = np.asarray(labels, dtype=int)
        centroids: dict[int, np.ndarray] = {}
        sizes: dict[int, int] = {}
        for k in np.unique(labels):
            if k == NOISE:
                continue
            mask = labels == k
            centroids[int(k)] = points[mask].mean(axis=0)
            sizes[int(k)] = int(mask.sum())
        return cls(labels=labels, centroids=centroids, sizes=sizes)

    @property
    def cluster_ids(self) -> list[int]:
        return sorted(self.centroids)


def dbscan(points, eps: float, min_pts: int) -> ClusterLabeling:
    """DBSCAN over feature vectors of uniform dimension.

    Core points have >= min_pts neighbors within eps (counting themselves);
    clusters are maximal density-connected sets; border points join the first
    discovered adjacent cluster. Cluster ids follow discovery order.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = pts.shape[0] if pts.size else 0
    if n == 0:
        return ClusterLabeling(labels=np.empty(0, dtype=int))

    diff = pts[:, None, :] - pts[None, :, :]
    within = np.einsum("ijk,ijk->ij", diff, diff) <= eps * eps
    neighbor_counts = within.sum(axis=1)
    core = neighbor_counts >= min_pts

    labels = np.full(n, NOISE, dtype=int)
    visited = np.zeros(n, dtype=bool)
    next_id = 0
    for i in range(n):
        if visited[i] or not core[i]:
            continue
        # Expand a new cluster from seed i, frontier processed in index order.
        visited[i] = True
        labels[i] = next_id
        frontier = deque(int(m) for m in np.flatnonzero(within[i]))
        while frontier:
            j = frontier.popleft()
            if labels[j] == NOISE:
                labels[j] = next_id  # border point claimed by first adjacent cluster
            if visited[j]:
                continue
            visited[j] = True
            if core[j]:
                frontier.extend(int(m) for m in np.flatnonzero(within[j]) if not visited[m])
        next_id += 1
    return ClusterLabeling.from_labels(pts, labels)


def associate_centroids(
    current: ClusterLabeling,
    previous: ClusterLabeling,
    dt: float,
    gating_radius: float = 1.0,
) -> dict[int, np.ndarray]:
    """Per-cluster velocity by nearest-previous-centroid finite differencing.

    Clusters with no previous centroid within gating_radius get (0, 0).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    velocities: dict[int, np.ndarray] = {}
    prev_ids = previous.cluster_ids if previous is not None else []
    for k in current.cluster_ids:
        ck = current.centroids[k]
        v = np.zeros(2)
        if prev_ids:
            dists = [(float(np.linalg.norm(ck - previous.centroids[l])), l) for l in prev_ids]
            best_d, best_l = min(dists)
            if best_d <= gating_radius:
                v = (ck - previous.centroids[best_l]) / dt
        velocities[k] = v
    return velocities


def filter_large_clusters(
    labeling: ClusterLabeling, points, max_extent: float
) -> ClusterLabeling:
    """Relabel as noise any cluster whose bounding-box diagonal exceeds max_extent.

    The boundary is inclusive: a cluster spanning exactly max_extent is kept.
    Surviving clusters keep their ids.
    """
    if max_extent <= 0.0:
        raise ValueError("max_extent must be positive")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    labels = labeling.labels.copy()
    centroids = dict(labeling.centroids)
    sizes = dict(labeling.sizes)
    for k in labeling.cluster_ids:
        member = pts[labeling.labels == k]
        span = member.max(axis=0) - member.min(axis=0)
        if float(np.hypot(*span[:2])) > max_extent:
            labels[labeling.labels == k] = NOISE
            del centroids[k]
            del sizes[k]
    return ClusterLabeling(labels=labels, centroids=centroids, sizes=sizes)

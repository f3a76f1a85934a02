import numpy as np
import pytest

from edgenav.clustering import NOISE, associate_centroids, dbscan, filter_large_clusters


# --- oracle: cluster partition from the eps-graph over core points -----------

def core_graph_partition(points, eps, min_pts):
    """Connected components of the eps-neighborhood graph restricted to core
    points; border points attach to any adjacent core component."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    n = len(pts)
    diff = pts[:, None, :] - pts[None, :, :]
    within = np.einsum("ijk,ijk->ij", diff, diff) <= eps * eps
    core = within.sum(axis=1) >= min_pts
    comp = [-1] * n
    cid = 0
    for i in range(n):
        if not core[i] or comp[i] != -1:
            continue
        stack = [i]
        comp[i] = cid
        while stack:
            j = stack.pop()
            for m in np.flatnonzero(within[j] & core):
                if comp[m] == -1:
                    comp[m] = cid
                    stack.append(int(m))
        cid += 1
    clusters = [set(np.flatnonzero([c == k for c in comp])) for k in range(cid)]
    border = {}
    for i in range(n):
        if core[i]:
            continue
        for k, members in enumerate(clusters):
            if any(within[i, j] for j in members):
                border[i] = k
                break
    return clusters, border, core


def partition_of(labeling):
    out = {}
    for i, k in enumerate(labeling.labels):
        if k != NOISE:
            out.setdefault(int(k), set()).add(i)
    return sorted(out.values(), key=lambda s: min(s))


def test_two_separated_blobs_1d():
    lab = dbscan([0.0, 0.1, 0.2, 5.0], eps=0.5, min_pts=1)
    assert lab.labels.tolist() == [0, 0, 0, 1]


def test_insufficient_density_all_noise():
    lab = dbscan([0.0, 10.0], eps=0.5, min_pts=3)
    assert lab.labels.tolist() == [NOISE, NOISE]


def test_empty_input():
    lab = dbscan(np.empty((0, 2)), eps=0.5, min_pts=1)
    assert lab.labels.shape == (0,)
    assert lab.centroids == {}


def test_three_gaussian_blobs_match_core_graph_oracle():
    rng = np.random.default_rng(7)
    centers = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
    pts = np.vstack([c + rng.normal(scale=0.1, size=(66, 2)) for c in centers])[:200]
    lab = dbscan(pts, eps=0.5, min_pts=3)
    clusters, border, core = core_graph_partition(pts, 0.5, 3)
    assert len(partition_of(lab)) == 3
    # exact blob membership: each cluster is one blob of 66/67 points
    for cluster in partition_of(lab):
        blob_ids = {i // 66 for i in cluster}
        assert len(blob_ids) == 1
    assert sorted(map(frozenset, partition_of(lab))) == sorted(
        map(frozenset, [c | {i for i, k in border.items() if k == j} for j, c in enumerate(clusters)])
    )


def test_centroid_and_size_invariants():
    rng = np.random.default_rng(8)
    pts = rng.normal(size=(50, 2))
    lab = dbscan(pts, eps=0.8, min_pts=2)
    noise = int((lab.labels == NOISE).sum())
    assert sum(lab.sizes.values()) + noise == 50
    for k, c in lab.centroids.items():
        members = pts[lab.labels == k]
        assert np.allclose(c, members.mean(axis=0))
        assert lab.sizes[k] == len(members)


def test_rigid_transform_invariance():
    rng = np.random.default_rng(9)
    for _ in range(20):
        pts = rng.normal(scale=2.0, size=(40, 2))
        theta = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        moved = pts @ rot.T + rng.normal(size=2)
        a = partition_of(dbscan(pts, eps=1.0, min_pts=2))
        b = partition_of(dbscan(moved, eps=1.0, min_pts=2))
        assert sorted(map(frozenset, a)) == sorted(map(frozenset, b))


def test_points_near_core_are_not_noise():
    rng = np.random.default_rng(10)
    pts = rng.normal(size=(60, 2))
    eps, min_pts = 0.7, 4
    lab = dbscan(pts, eps, min_pts)
    diff = pts[:, None, :] - pts[None, :, :]
    within = np.einsum("ijk,ijk->ij", diff, diff) <= eps * eps
    core = within.sum(axis=1) >= min_pts
    for i in range(len(pts)):
        if np.any(within[i] & core):
            assert lab.labels[i] != NOISE


def test_determinism_in_input_order():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(30, 2))
    a = dbscan(pts, 0.9, 2)
    b = dbscan(pts, 0.9, 2)
    assert a.labels.tolist() == b.labels.tolist()


def test_invalid_parameters():
    with pytest.raises(ValueError):
        dbscan([[0.0, 0.0]], eps=0.0, min_pts=1)
    with pytest.raises(ValueError):
        dbscan([[0.0, 0.0]], eps=0.5, min_pts=0)


# --- associate_centroids -----------------------------------------------------

def test_association_simple_velocity():
    prev = dbscan(np.array([[0.0, 0.0]]), 0.5, 1)
    cur = dbscan(np.array([[0.1, 0.0]]), 0.5, 1)
    v = associate_centroids(cur, prev, dt=0.1)
    assert v[0] == pytest.approx([1.0, 0.0])


def test_association_cold_start():
    cur = dbscan(np.array([[1.0, 2.0], [5.0, 5.0]]), 0.5, 1)
    empty = dbscan(np.empty((0, 2)), 0.5, 1)
    v = associate_centroids(cur, empty, dt=0.1)
    assert all(np.allclose(val, 0.0) for val in v.values())


def test_association_picks_nearest_previous():
    prev = dbscan(np.array([[0.0, 0.0], [5.0, 0.0]]), 0.5, 1)
    cur = dbscan(np.array([[0.2, 0.0]]), 0.5, 1)
    v = associate_centroids(cur, prev, dt=0.1)
    assert v[0] == pytest.approx([2.0, 0.0])


def test_association_gating_radius():
    prev = dbscan(np.array([[0.0, 0.0]]), 0.5, 1)
    cur = dbscan(np.array([[3.0, 0.0]]), 0.5, 1)
    v = associate_centroids(cur, prev, dt=0.1, gating_radius=1.0)
    assert v[0] == pytest.approx([0.0, 0.0])


def test_association_identical_frames_zero_velocity():
    pts = np.random.default_rng(3).normal(size=(20, 2))
    lab = dbscan(pts, 0.8, 2)
    v = associate_centroids(lab, lab, dt=0.5)
    for val in v.values():
        assert np.allclose(val, 0.0)


# --- filter_large_clusters ---------------------------------------------------

def test_filter_removes_wall_sized_cluster():
    pts = np.column_stack((np.linspace(0, 4, 20), np.zeros(20)))
    lab = dbscan(pts, eps=0.5, min_pts=1)
    out = filter_large_clusters(lab, pts, max_extent=1.5)
    assert np.all(out.labels == NOISE)


def test_filter_keeps_pedestrian_sized_cluster():
    pts = np.array([[0.0, 0.0], [0.4, 0.0]])
    lab = dbscan(pts, eps=0.5, min_pts=1)
    out = filter_large_clusters(lab, pts, max_extent=1.5)
    assert out.labels.tolist() == lab.labels.tolist()


def test_filter_boundary_is_inclusive():
    pts = np.array([[0.0, 0.0], [1.5, 0.0]])
    lab = dbscan(pts, eps=2.0, min_pts=1)
    assert len(lab.cluster_ids) == 1
    out = filter_large_clusters(lab, pts, max_extent=1.5)
    assert out.labels.tolist() == lab.labels.tolist()
    just_over = np.array([[0.0, 0.0], [1.5 + 1e-6, 0.0]])
    lab2 = dbscan(just_over, eps=2.0, min_pts=1)
    out2 = filter_large_clusters(lab2, just_over, max_extent=1.5)
    assert np.all(out2.labels == NOISE)


def test_filter_preserves_surviving_labels():
    rng = np.random.default_rng(4)
    blob = rng.normal(scale=0.1, size=(10, 2))
    wall = np.column_stack((np.linspace(10, 16, 30), np.zeros(30)))
    pts = np.vstack((blob, wall))
    lab = dbscan(pts, eps=0.5, min_pts=1)
    out = filter_large_clusters(lab, pts, max_extent=1.5)
    surviving = [k for k in lab.cluster_ids if k in out.centroids]
    for k in surviving:
        assert np.array_equal(out.labels == k, lab.labels == k)

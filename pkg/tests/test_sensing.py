import numpy as np
import pytest

from edgenav.sensing import (
    LidarConfig,
    Scan,
    SensorOccluded,
    augment_pedestrians,
    augment_scan,
    make_entity,
    read_scan_log,
    simulate_scan,
    write_scan_log,
)

NO_NOISE = LidarConfig(noise_half_width=0.0)


def bearings_of(scan):
    rel = scan.points - scan.origin
    return np.arctan2(rel[:, 1], rel[:, 0])


def test_single_circle_head_on_hit():
    scan = simulate_scan((0, 0), [((2.0, 0.0), 0.5)], NO_NOISE, rng_seed=0)
    # ray at bearing 0 hits the near side
    assert scan.points[0] == pytest.approx([1.5, 0.0], abs=1e-12)
    # no hits beyond the tangent bearings
    b = np.degrees(bearings_of(scan))
    b = np.where(b > 180, b - 360, b)
    assert np.abs(b).max() <= np.degrees(np.arcsin(0.5 / 2.0)) + 1e-9


def test_no_pedestrians_empty_scan():
    scan = simulate_scan((0, 0), [], NO_NOISE, rng_seed=0)
    assert scan.points.shape == (0, 2)


def test_occlusion_near_circle_shadows_far():
    scan = simulate_scan((0, 0), [((2.0, 0.0), 0.5), ((4.0, 0.0), 0.5)], NO_NOISE, rng_seed=0)
    # all registered points belong to the near circle
    d_near = np.abs(np.linalg.norm(scan.points - [2.0, 0.0], axis=1) - 0.5)
    assert np.all(d_near < 1e-9)


def test_zero_noise_points_lie_on_circles():
    rng = np.random.default_rng(5)
    peds = [(rng.uniform(-5, 5, size=2), 0.5) for _ in range(4)]
    peds = [(c, r) for c, r in peds if np.linalg.norm(c) > 1.0]
    scan = simulate_scan((0, 0), peds, NO_NOISE, rng_seed=1)
    resid = np.min(
        [np.abs(np.linalg.norm(scan.points - c, axis=1) - r) for c, r in peds], axis=0
    )
    assert np.all(resid < 1e-9)


def test_noise_bounded_and_seed_reproducible():
    cfg = LidarConfig(noise_half_width=0.05)
    peds = [((2.0, 1.0), 0.5), ((-3.0, 0.5), 0.5)]
    a = simulate_scan((0, 0), peds, cfg, rng_seed=42)
    b = simulate_scan((0, 0), peds, cfg, rng_seed=42)
    assert np.array_equal(a.points, b.points)
    clean = simulate_scan((0, 0), peds, NO_NOISE, rng_seed=42)
    assert a.points.shape == clean.points.shape
    resid = a.points - clean.points
    assert np.all(np.abs(resid) <= 0.05)
    c = simulate_scan((0, 0), peds, cfg, rng_seed=43)
    assert not np.array_equal(a.points, c.points)


def test_scan_count_bounded_by_ray_count():
    cfg = LidarConfig(noise_half_width=0.0, angular_resolution=1.0)
    peds = [((2.0, 0.0), 0.5), ((0.0, 2.0), 0.5), ((-2.0, 0.0), 0.5)]
    scan = simulate_scan((0, 0), peds, cfg, rng_seed=0)
    assert len(scan.points) <= cfg.n_rays == 360


def test_points_sorted_by_bearing_without_noise():
    peds = [((2.0, 0.5), 0.5), ((1.0, -2.0), 0.5)]
    scan = simulate_scan((0, 0), peds, NO_NOISE, rng_seed=0)
    b = np.mod(bearings_of(scan), 2 * np.pi)
    assert np.all(np.diff(b) > 0)


def test_max_range_cutoff():
    cfg = LidarConfig(noise_half_width=0.0, max_range=3.0)
    scan = simulate_scan((0, 0), [((5.0, 0.0), 0.5)], cfg, rng_seed=0)
    assert scan.points.shape == (0, 2)


def test_origin_inside_circle_raises():
    with pytest.raises(SensorOccluded, match="occluded"):
        simulate_scan((0, 0), [((0.2, 0.0), 0.5)], NO_NOISE, rng_seed=0)


# --- augment_scan -------------------------------------------------------------

def scan_at(points, t=0.0):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return Scan(timestamp=t, origin=np.zeros(2), points=pts)


def test_augment_scan_moving_cluster():
    prev = scan_at([[2.0, 0.0], [2.1, 0.1]])
    cur = scan_at([[2.13, 0.0], [2.23, 0.1]])
    ents = augment_scan(cur, prev, eps=0.5, dt=0.1, max_extent=1.5)
    assert len(ents) == 2
    for e in ents:
        assert e.speed == pytest.approx(1.3, abs=1e-9)
        assert e.heading == pytest.approx(0.0, abs=1e-9)


def test_augment_scan_cold_start():
    cur = scan_at([[2.0, 0.0], [2.1, 0.0]])
    ents = augment_scan(cur, None, eps=0.5, dt=0.1, max_extent=1.5)
    assert all(e.speed == 0.0 and e.heading == 0.0 for e in ents)


def test_augment_scan_two_clusters_keep_own_association():
    prev = scan_at([[0.0, 0.0], [3.0, 0.0]])
    cur = scan_at([[0.13, 0.0], [3.13, 0.0]])
    ents = augment_scan(cur, prev, eps=0.5, dt=0.1, max_extent=1.5)
    # both clusters associate to their own previous center, both move +x
    assert len(ents) == 2
    for e in ents:
        assert e.speed == pytest.approx(1.3, abs=1e-9)


def test_augment_scan_drops_wall():
    wall = np.column_stack((np.linspace(0, 4, 30), np.full(30, 2.0)))
    cur = scan_at(np.vstack((wall, [[6.0, 0.0]])))
    ents = augment_scan(cur, None, eps=0.5, dt=0.1, max_extent=1.5)
    assert len(ents) == 1
    assert ents[0].position == pytest.approx([6.0, 0.0])


def test_augment_scan_heading_matches_velocity():
    prev = scan_at([[2.0, 0.0]])
    cur = scan_at([[2.1, 0.1]])
    ents = augment_scan(cur, prev, eps=0.5, dt=0.1, max_extent=1.5)
    assert ents[0].heading == pytest.approx(np.pi / 4)
    assert ents[0].speed == pytest.approx(np.hypot(1.0, 1.0))


# --- augment_pedestrians --------------------------------------------------------

def test_pedestrian_finite_difference():
    ents = augment_pedestrians([(3, (0.175, 0.0))], [(3, (0.0, 0.0))], dt=0.1)
    assert ents[0].speed == pytest.approx(1.75)
    assert ents[0].heading == 0.0
    assert ents[0].source == 3


def test_stationary_pedestrian():
    ents = augment_pedestrians([(1, (2.0, 2.0))], [(1, (2.0, 2.0))], dt=0.1)
    assert ents[0].speed == 0.0


def test_new_id_cold_start():
    ents = augment_pedestrians([(9, (1.0, 1.0))], [(1, (2.0, 2.0))], dt=0.1)
    assert ents[0].speed == 0.0 and ents[0].heading == 0.0


def test_duplicate_id_rejected():
    with pytest.raises(ValueError, match="duplicate pedestrian id"):
        augment_pedestrians([(1, (0, 0)), (1, (1, 1))], [], dt=0.1)


def test_heading_normalized():
    e = make_entity((0, 0), (-1.0, -1.0), 0)
    assert 0.0 <= e.heading < 2 * np.pi


# --- scan log round trip --------------------------------------------------------

def test_scan_log_round_trip(tmp_path):
    peds = [((2.0, 1.0), 0.5)]
    scans = []
    for k in range(3):
        s = simulate_scan((0, 0), peds, LidarConfig(), rng_seed=k)
        s.timestamp = k * 0.1
        scans.append(s)
    path = tmp_path / "scan.jsonl"
    write_scan_log(path, scans)
    back = read_scan_log(path)
    assert len(back) == 3
    for a, b in zip(scans, back):
        assert b.timestamp == pytest.approx(a.timestamp)
        assert np.allclose(a.points, b.points, atol=1e-6)

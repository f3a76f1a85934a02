"""Simulate a 2D LiDAR and recover moving groups from raw scans.

Three pedestrians (a pair plus a loner) walk through the field of view. Rays
at 0.25 degree resolution hit their 0.5 m circles; +/-0.05 m noise lands on
every return. Frame-to-frame cluster association recovers per-point
velocities without any pedestrian tracker, and grouping runs directly on the
augmented scan points.
"""

import numpy as np

from edgenav import GroupingParams, LidarConfig, assign_groups, augment_scan, simulate_scan

cfg = LidarConfig()  # 0.25 deg, 20 m range, +/-0.05 m noise, 0.5 m circles
robot = np.array([0.0, 0.0])

positions = [np.array([4.0, -0.4]), np.array([4.0, 0.4]), np.array([2.0, -3.0])]
velocities = [np.array([0.0, 1.2]), np.array([0.0, 1.2]), np.array([1.0, 0.0])]
dt = 0.1

prev_scan = None
for frame in range(3):
    peds = [(p + frame * dt * v, cfg.pedestrian_radius) for p, v in zip(positions, velocities)]
    scan = simulate_scan(robot, peds, cfg, rng_seed=frame)
    scan.timestamp = frame * dt
    entities = augment_scan(scan, prev_scan, eps=0.5, dt=dt, max_extent=4.0)
    print(f"frame {frame}: {len(scan.points)} scan points -> {len(entities)} augmented entities")
    if entities:
        speeds = sorted({round(e.speed, 2) for e in entities})
        print(f"  estimated speeds per cluster: {speeds} (true: [1.0, 1.2])")
    prev_scan = scan

groups = assign_groups(entities, GroupingParams())
print(f"\ngroups over scan points: {len(groups)}")
for g in groups:
    pts = np.array([m.position for m in g.members])
    print(f"  group {g.id}: {len(g.members)} scan points, centroid {np.round(pts.mean(axis=0), 2)}")
print("the walking pair and the loner separate by position and velocity, no tracker involved")

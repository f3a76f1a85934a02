"""Build a visible-edge pentagon step by step.

Two pedestrians walk side by side; the robot watches from the origin. We
cluster them into one group, pick the three key points on the robot-facing
side of their personal-space eggs, and extrude the occlusion offset to get
the pentagon. Compare its footprint with the convex-hull representation.
"""

import numpy as np

from edgenav import (
    GroupingParams,
    assign_groups,
    build_pentagon,
    convex_hull_space,
    point_polygon_distance,
    visible_edge_keypoints,
)
from edgenav.sensing import make_entity

robot = np.array([0.0, 0.0])
params = GroupingParams()

# Two pedestrians 0.8 m apart, walking +y at 1.2 m/s, 4 m from the robot.
entities = [
    make_entity((4.0, -0.4), (0.0, 1.2), 0),
    make_entity((4.0, 0.4), (0.0, 1.2), 1),
]

groups = assign_groups(entities, params)
print(f"groups found: {len(groups)} (members: {[len(g.members) for g in groups]})")

group = groups[0]
p_l, p_c, p_r = visible_edge_keypoints(group, robot, params)
print(f"key points:\n  p_l = {np.round(p_l, 3)}\n  p_c = {np.round(p_c, 3)}\n  p_r = {np.round(p_r, 3)}")

pentagon = build_pentagon((p_l, p_c, p_r), robot, params.offset_d)
print("\npentagon vertices (p_l, p_c, p_r, p_ro, p_lo):")
for v in pentagon.vertices:
    print(f"  {np.round(v, 3)}")

# The two offset vertices sit exactly offset_d farther from the robot.
for name, near, far in (("left", pentagon.p_l, pentagon.p_lo), ("right", pentagon.p_r, pentagon.p_ro)):
    extra = np.linalg.norm(far - robot) - np.linalg.norm(near - robot)
    print(f"offset depth on the {name} side: {extra:.6f} m")

hull = convex_hull_space(group, params)
print(f"\nconvex-hull representation has {len(hull.vertices)} vertices "
      f"(pentagon always has 5, and only 3 of them need tracking)")

for probe in ([0.0, 0.0], [3.4, 0.0], [4.0, 0.0], [4.0, 3.0]):
    dp = point_polygon_distance(probe, pentagon)
    dh = point_polygon_distance(probe, hull.shape)
    print(f"distance from {probe}: pentagon {dp:.3f} m, hull {dh:.3f} m")

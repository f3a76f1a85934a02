"""Group assignment and group-space construction.

Groups are DBSCAN clusters over position+velocity features. Each group gets a
2D "socially occupied" region: either the visible-edge pentagon (three key
points on the robot-facing side plus two offset points pushed away from the
robot) or the convex hull of all members' personal-space boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clustering import dbscan
from .geometry import (
    ConvexHullShape,
    DegenerateKeypoint,
    EggParams,
    GEOM_EPS,
    GroupSurroundsRobot,
    Pentagon,
    angular_extreme_indices,
    as_point,
    convex_hull,
    egg_boundary,
    is_simple_polygon,
    wrap_angle,
)
from .sensing import AugmentedEntity, entity_velocity


@dataclass(frozen=True)
class GroupingParams:
    group_eps: float = 1.5          # m, DBSCAN eps over the 4-D features
    velocity_weight: float = 1.0    # s, scales velocity into position units
    min_pts: int = 1                # singleton pedestrians form groups of one
    offset_d: float = 1.0           # m, occlusion buffer behind the visible edge
    egg: EggParams = field(default_factory=EggParams)
    boundary_samples: int = 36

    def __post_init__(self):
        if self.group_eps <= 0.0:
            raise ValueError("group_eps must be positive")
        if self.offset_d <= 0.0:
            raise ValueError("offset_d must be positive")


@dataclass
class Group:
    id: int
    members: list[AugmentedEntity]


@dataclass
class GroupSpace:
    group_id: int
    shape: Pentagon | ConvexHullShape
    keypoints: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None  # (p_l, p_c, p_r)

    @property
    def kind(self) -> str:
        return "pentagon" if isinstance(self.shape, Pentagon) else "hull"

    @property
    def vertices(self) -> np.ndarray:
        return self.shape.vertices


def assign_groups(entities, params: GroupingParams) -> list[Group]:
    """Cluster entities into groups over (x, y, w*vx, w*vy) features.

    DBSCAN noise points become singleton groups.
    """
    entities = list(entities)
    if not entities:
        return []
    w = params.velocity_weight
    feats = np.array(
        [[e.position[0], e.position[1], *(w * entity_velocity(e))] for e in entities]
    )
    labeling = dbscan(feats, params.group_eps, params.min_pts)
    groups: list[Group] = []
    for k in labeling.cluster_ids:
        members = [entities[i] for i in np.flatnonzero(labeling.labels == k)]
        groups.append(Group(id=len(groups), members=members))
    for i in np.flatnonzero(labeling.labels < 0):
        groups.append(Group(id=len(groups), members=[entities[int(i)]]))
    return groups


def _member_boundary(e: AugmentedEntity, params: GroupingParams) -> np.ndarray:
    return egg_boundary(e.position, e.heading, e.speed, params.egg, params.boundary_samples)


def visible_edge_keypoints(group: Group, robot, params: GroupingParams):
    """Key points (p_l, p_c, p_r) of the group's robot-facing edge.

    The closest member and the two angular-extreme members are selected by
    raw position; the key points are then extreme/closest samples of those
    members' egg boundaries. Ties on the closest member break to the lowest
    member index.
    """
    robot = as_point(robot)
    positions = np.array([m.position for m in group.members])
    dist = np.linalg.norm(positions - robot, axis=1)
    qc = int(np.argmin(dist))
    if len(group.members) == 1:
        ql = qr = qc
    else:
        ql, qr = angular_extreme_indices(positions, robot)

    bc = _member_boundary(group.members[qc], params)
    p_c = bc[int(np.argmin(np.linalg.norm(bc - robot, axis=1)))]
    bl = _member_boundary(group.members[ql], params)
    p_l = bl[angular_extreme_indices(bl, robot)[0]]
    br = _member_boundary(group.members[qr], params)
    p_r = br[angular_extreme_indices(br, robot)[1]]
    return p_l.copy(), p_c.copy(), p_r.copy()


def build_pentagon(keypoints, robot, offset_d: float) -> Pentagon | ConvexHullShape:
    """Pentagon (p_l, p_c, p_r, p_ro, p_lo) with offsets pushed away from robot.

    A self-intersecting raw pentagon is repaired by re-ordering vertices by
    bearing from the robot; if that still fails, the convex hull of the five
    points is returned instead (a conservative, larger space).
    """
    robot = as_point(robot)
    p_l, p_c, p_r = (as_point(p) for p in keypoints)

    def offset(p):
        u = p - robot
        n = float(np.hypot(*u))
        if n < GEOM_EPS:
            raise DegenerateKeypoint("degenerate key point")
        return p + offset_d * u / n

    verts = np.array([p_l, p_c, p_r, offset(p_r), offset(p_l)])
    if is_simple_polygon(verts):
        return Pentagon(verts)
    rel = verts - robot
    bearings = np.arctan2(rel[:, 1], rel[:, 0])
    mean = np.arctan2(np.sin(bearings).mean(), np.cos(bearings).mean())
    order = np.argsort(-wrap_angle(bearings - mean), kind="stable")
    reordered = verts[order]
    if is_simple_polygon(reordered):
        return Pentagon(reordered)
    return convex_hull(verts)


def pentagon_space(group: Group, robot, params: GroupingParams) -> GroupSpace:
    """Visible-edge group space for one group."""
    kp = visible_edge_keypoints(group, robot, params)
    shape = build_pentagon(kp, robot, params.offset_d)
    return GroupSpace(
        group_id=group.id,
        shape=shape,
        keypoints=kp if isinstance(shape, Pentagon) else None,
    )


def convex_hull_space(group: Group, params: GroupingParams) -> GroupSpace:
    """Convex hull over the union of all members' egg boundaries."""
    if not group.members:
        raise ValueError("empty group")
    samples = np.vstack([_member_boundary(m, params) for m in group.members])
    return GroupSpace(group_id=group.id, shape=convex_hull(samples))


FALLBACK_SINGLETON_LIMIT = 12


def build_edge_spaces(entities, robot, params: GroupingParams) -> list[GroupSpace]:
    """Full per-frame edge pipeline: assign groups, build pentagon spaces.

    A group whose members angularly surround the robot falls back to
    per-member singleton spaces; a member whose own egg surrounds the robot
    (robot inside the egg) falls back to the hull of that egg's samples.
    Scan-point groups can have hundreds of members, so oversized groups fall
    back to a single hull space instead of per-member singletons.
    """
    robot = as_point(robot)
    spaces: list[GroupSpace] = []

    def add_singleton(member):
        solo = Group(id=len(spaces), members=[member])
        try:
            spaces.append(pentagon_space(solo, robot, params))
        except (GroupSurroundsRobot, DegenerateKeypoint):
            hull = convex_hull(_member_boundary(member, params))
            spaces.append(GroupSpace(group_id=solo.id, shape=hull))
        spaces[-1].group_id = len(spaces) - 1

    for group in assign_groups(entities, params):
        try:
            space = pentagon_space(group, robot, params)
            space.group_id = len(spaces)
            spaces.append(space)
        except (GroupSurroundsRobot, DegenerateKeypoint):
            if len(group.members) > FALLBACK_SINGLETON_LIMIT:
                space = convex_hull_space(group, params)
                space.group_id = len(spaces)
                spaces.append(space)
            else:
                for member in group.members:
                    add_singleton(member)
    return spaces


def build_hull_spaces(entities, params: GroupingParams) -> list[GroupSpace]:
    """Full per-frame hull pipeline: assign groups, hull each group's eggs."""
    spaces = []
    for group in assign_groups(entities, params):
        space = convex_hull_space(group, params)
        space.group_id = len(spaces)
        spaces.append(space)
    return spaces


def write_group_space_log(path, frames) -> None:
    """JSON-lines export: one record {t, groups: [{id, kind, vertices}]} per frame."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        for t, spaces in frames:
            rec = {
                "t": round(float(t), 6),
                "groups": [
                    {
                        "id": int(s.group_id),
                        "kind": s.kind,
                        "vertices": [[round(float(x), 6), round(float(y), 6)] for x, y in s.vertices],
                    }
                    for s in spaces
                ],
            }
            f.write(json.dumps(rec) + "\n")


def read_group_space_log(path) -> list[tuple[float, list[dict]]]:
    frames = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            frames.append((float(rec["t"]), rec["groups"]))
    return frames

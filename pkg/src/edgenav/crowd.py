"""Pedestrian motion: trajectory replay, reciprocal collision avoidance, synthesis.

The reactive simulation follows the classic reciprocal velocity-obstacle
scheme: each agent collects half-plane constraints from its neighbors, then
solves a small 2D linear program for the admissible velocity closest to its
preferred one, with a 3D fallback that minimizes the worst violation when the
constraints are infeasible. Velocities are computed from a frame snapshot
(Jacobi update) so results are order-independent and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .geometry import as_point

RVO_EPS = 1e-5
# Deterministic preferred-velocity rotation that breaks exact symmetry: agents
# consistently pass on their right, and the per-agent scaling unwinds fully
# symmetric configurations (e.g. antipodal circle swaps) that a uniform bias
# would leave deadlocked. Applied only when avoidance constraints exist.
TIE_BREAK_ROT = -1e-4


@dataclass
class TrajectoryDataset:
    """Recorded pedestrian trajectories: per-id frame numbers and positions."""

    tracks: dict[int, tuple[np.ndarray, np.ndarray]]  # id -> (frames (k,), xy (k, 2))
    frame_dt: float                                   # seconds per frame-number unit

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        xy = np.vstack([t[1] for t in self.tracks.values()]) if self.tracks else np.zeros((1, 2))
        return (
            float(xy[:, 0].min()),
            float(xy[:, 1].min()),
            float(xy[:, 0].max()),
            float(xy[:, 1].max()),
        )

    @property
    def time_range(self) -> tuple[float, float]:
        if not self.tracks:
            return (0.0, 0.0)
        lo = min(frames[0] for frames, _ in self.tracks.values()) * self.frame_dt
        hi = max(frames[-1] for frames, _ in self.tracks.values()) * self.frame_dt
        return (float(lo), float(hi))

    def records(self):
        """Rows (frame, id, x, y) sorted by frame then id."""
        rows = []
        for pid in sorted(self.tracks):
            frames, xy = self.tracks[pid]
            for fr, (x, y) in zip(frames, xy):
                rows.append((int(fr), pid, float(x), float(y)))
        rows.sort(key=lambda r: (r[0], r[1]))
        return rows


def load_dataset(path, frame_dt: float = 0.04) -> TrajectoryDataset:
    """Parse whitespace-separated rows "frame id x y" into a dataset.

    frame_dt maps raw frame numbers to seconds (ETH/UCY annotate every 10
    frames of 25 fps video, i.e. 0.04 s per frame unit). Duplicate
    (frame, id) pairs and non-increasing frames per id are rejected.
    """
    path = Path(path)
    rows = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 'frame id x y', got {line!r}")
            try:
                frame = float(parts[0])
                pid = int(float(parts[1]))
                x, y = float(parts[2]), float(parts[3])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
            rows.append((frame, pid, x, y))
    if not rows:
        raise ValueError(f"{path}: empty dataset")

    tracks: dict[int, list[tuple[float, float, float]]] = {}
    seen: set[tuple[float, int]] = set()
    for frame, pid, x, y in rows:
        if (frame, pid) in seen:
            raise ValueError(f"duplicate (frame, id) = ({frame:g}, {pid})")
        seen.add((frame, pid))
        track = tracks.setdefault(pid, [])
        if track and frame <= track[-1][0]:
            raise ValueError(f"out-of-order frames for pedestrian {pid}")
        track.append((frame, x, y))

    packed = {
        pid: (
            np.array([r[0] for r in rs], dtype=float),
            np.array([[r[1], r[2]] for r in rs], dtype=float),
        )
        for pid, rs in tracks.items()
    }
    return TrajectoryDataset(tracks=packed, frame_dt=frame_dt)


def save_dataset(dataset: TrajectoryDataset, path) -> None:
    """Write the plain-text "frame id x y" format back out."""
    with Path(path).open("w", encoding="utf-8") as f:
        for frame, pid, x, y in dataset.records():
            f.write(f"{frame} {pid} {x:.6f} {y:.6f}\n")


def replay_step(dataset: TrajectoryDataset, t: float) -> list[tuple[int, np.ndarray]]:
    """Interpolated positions of pedestrians alive at time t (sorted by id)."""
    out = []
    for pid in sorted(dataset.tracks):
        frames, xy = dataset.tracks[pid]
        times = frames * dataset.frame_dt
        if t < times[0] or t > times[-1]:
            continue
        x = float(np.interp(t, times, xy[:, 0]))
        y = float(np.interp(t, times, xy[:, 1]))
        out.append((pid, np.array([x, y])))
    return out


@dataclass
class OrcaAgent:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    pref_velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    radius: float = 0.3
    max_speed: float = 1.4
    time_horizon: float = 2.0
    neighbor_dist: float = 5.0
    goal: np.ndarray | None = None

    def __post_init__(self):
        self.position = as_point(self.position)
        self.velocity = np.asarray(self.velocity, dtype=float)
        self.pref_velocity = np.asarray(self.pref_velocity, dtype=float)
        if self.goal is not None:
            self.goal = as_point(self.goal)


def _det(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


def _avoidance_line(pos, vel, other_pos, other_vel, combined_radius, inv_tau, inv_dt, share):
    """One half-plane constraint (point, direction) against a single neighbor."""
    rel_pos = other_pos - pos
    rel_vel = vel - other_vel
    dist_sq = float(rel_pos @ rel_pos)
    r_sq = combined_radius * combined_radius

    if dist_sq > r_sq:
        w = rel_vel - inv_tau * rel_pos
        w_len_sq = float(w @ w)
        dot1 = float(w @ rel_pos)
        if dot1 < 0.0 and dot1 * dot1 > r_sq * w_len_sq:
            # Project on the cut-off circle.
            w_len = math.sqrt(w_len_sq)
            unit_w = w / w_len
            direction = np.array([unit_w[1], -unit_w[0]])
            u = (combined_radius * inv_tau - w_len) * unit_w
        else:
            # Project on the nearer leg of the velocity-obstacle cone.
            leg = math.sqrt(max(dist_sq - r_sq, 0.0))
            if _det(rel_pos, w) > 0.0:
                direction = (
                    np.array(
                        [
                            rel_pos[0] * leg - rel_pos[1] * combined_radius,
                            rel_pos[0] * combined_radius + rel_pos[1] * leg,
                        ]
                    )
                    / dist_sq
                )
            else:
                direction = (
                    -np.array(
                        [
                            rel_pos[0] * leg + rel_pos[1] * combined_radius,
                            -rel_pos[0] * combined_radius + rel_pos[1] * leg,
                        ]
                    )
                    / dist_sq
                )
            u = float(rel_vel @ direction) * direction - rel_vel
    else:
        # Already overlapping: push apart within one timestep.
        w = rel_vel - inv_dt * rel_pos
        w_len = float(np.hypot(*w))
        if w_len < RVO_EPS:
            w = np.array([-rel_pos[1], rel_pos[0]])
            w_len = float(np.hypot(*w))
            if w_len < RVO_EPS:
                w = np.array([1.0, 0.0])
                w_len = 1.0
        unit_w = w / w_len
        direction = np.array([unit_w[1], -unit_w[0]])
        u = (combined_radius * inv_dt - w_len) * unit_w

    point = vel + share * u
    return point, direction


def _lp1(lines, line_no, radius, opt_vel, direction_opt, result):
    """Clamp the solution onto constraint line_no; False if infeasible."""
    point, direction = lines[line_no]
    dot = float(point @ direction)
    discriminant = dot * dot + radius * radius - float(point @ point)
    if discriminant < 0.0:
        return False, result
    sqrt_disc = math.sqrt(discriminant)
    t_left = -dot - sqrt_disc
    t_right = -dot + sqrt_disc

    for i in range(line_no):
        pt_i, dir_i = lines[i]
        denominator = _det(direction, dir_i)
        numerator = _det(dir_i, point - pt_i)
        if abs(denominator) <= RVO_EPS:
            if numerator < 0.0:
                return False, result
            continue
        t = numerator / denominator
        if denominator >= 0.0:
            t_right = min(t_right, t)
        else:
            t_left = max(t_left, t)
        if t_left > t_right:
            return False, result

    if direction_opt:
        if float(opt_vel @ direction) > 0.0:
            result = point + t_right * direction
        else:
            result = point + t_left * direction
    else:
        t = float(direction @ (opt_vel - point))
        if t < t_left:
            result = point + t_left * direction
        elif t > t_right:
            result = point + t_right * direction
        else:
            result = point + t * direction
    return True, result


def _lp2(lines, radius, opt_vel, direction_opt):
    """Velocity closest to opt_vel inside all half-planes and the speed disc.

    Returns (index of first failing line or len(lines), result).
    """
    if direction_opt:
        result = opt_vel * radius
    elif float(opt_vel @ opt_vel) > radius * radius:
        result = opt_vel / np.hypot(*opt_vel) * radius
    else:
        result = opt_vel.copy()

    for i, (point, direction) in enumerate(lines):
        if _det(direction, point - result) > 0.0:
            temp = result
            ok, result = _lp1(lines, i, radius, opt_vel, direction_opt, result)
            if not ok:
                return i, temp
    return len(lines), result


def _lp3(lines, begin_line, radius, result):
    """Infeasible case: minimize the maximum constraint violation."""
    distance = 0.0
    for i in range(begin_line, len(lines)):
        point_i, dir_i = lines[i]
        if _det(dir_i, point_i - result) > distance:
            proj_lines = []
            for j in range(i):
                point_j, dir_j = lines[j]
                determinant = _det(dir_i, dir_j)
                if abs(determinant) <= RVO_EPS:
                    if float(dir_i @ dir_j) > 0.0:
                        continue
                    pt = 0.5 * (point_i + point_j)
                else:
                    pt = point_i + (_det(dir_j, point_i - point_j) / determinant) * dir_i
                dr = dir_j - dir_i
                dr = dr / np.hypot(*dr)
                proj_lines.append((pt, dr))
            temp = result
            fail, result = _lp2(proj_lines, radius, np.array([-dir_i[1], dir_i[0]]), True)
            if fail < len(proj_lines):
                result = temp
            distance = _det(dir_i, point_i - result)
    return result


def _rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def orca_step(agents: list[OrcaAgent], robot=None, dt: float = 0.1) -> list[OrcaAgent]:
    """Advance all agents one step; returns new agents (inputs untouched).

    robot, when present, is a (position, velocity, radius) triple treated as
    a regular reciprocal neighbor. Agents with a goal get their preferred
    velocity refreshed toward it, capped so they do not overshoot.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    inv_dt = 1.0 / dt
    snapshot = [(a.position.copy(), a.velocity.copy(), a.radius) for a in agents]
    if robot is not None:
        r_pos, r_vel, r_radius = as_point(robot[0]), np.asarray(robot[1], dtype=float), float(robot[2])

    new_agents = []
    for i, agent in enumerate(agents):
        if agent.goal is not None:
            to_goal = agent.goal - agent.position
            dist = float(np.hypot(*to_goal))
            if dist > RVO_EPS:
                pref = to_goal / dist * min(agent.max_speed, dist / dt)
            else:
                pref = np.zeros(2)
        else:
            pref = agent.pref_velocity

        inv_tau = 1.0 / agent.time_horizon
        lines = []
        for j, (pos_j, vel_j, radius_j) in enumerate(snapshot):
            if j == i:
                continue
            if float(np.hypot(*(pos_j - agent.position))) >= agent.neighbor_dist:
                continue
            lines.append(
                _avoidance_line(
                    agent.position, agent.velocity, pos_j, vel_j,
                    agent.radius + radius_j, inv_tau, inv_dt, share=0.5,
                )
            )
        if robot is not None and float(np.hypot(*(r_pos - agent.position))) < agent.neighbor_dist:
            lines.append(
                _avoidance_line(
                    agent.position, agent.velocity, r_pos, r_vel,
                    agent.radius + r_radius, inv_tau, inv_dt, share=0.5,
                )
            )

        pref_biased = _rotate(pref, TIE_BREAK_ROT * (1 + i % 16)) if lines else pref
        fail, v_new = _lp2(lines, agent.max_speed, pref_biased, False)
        if fail < len(lines):
            v_new = _lp3(lines, fail, agent.max_speed, v_new)

        new_agents.append(
            replace(
                agent,
                position=agent.position + v_new * dt,
                velocity=v_new,
                pref_velocity=pref,
            )
        )
    return new_agents


def agents_from_dataset(
    dataset: TrajectoryDataset,
    t: float,
    radius: float = 0.3,
    max_speed: float = 1.4,
    time_horizon: float = 2.0,
    neighbor_dist: float = 5.0,
) -> list[OrcaAgent]:
    """Seed reactive agents from recorded state at time t.

    Each agent adopts its recorded last position as its goal, so the same
    scenes drive both the replay and the reactive settings.
    """
    agents = []
    eps = dataset.frame_dt * 0.5
    for pid, pos in replay_step(dataset, t):
        frames, xy = dataset.tracks[pid]
        t_prev = max(t - eps, frames[0] * dataset.frame_dt)
        prev = replay_step_single(dataset, pid, t_prev)
        vel = (pos - prev) / (t - t_prev) if prev is not None and t > t_prev else np.zeros(2)
        agents.append(
            OrcaAgent(
                position=pos,
                velocity=vel,
                pref_velocity=vel,
                radius=radius,
                max_speed=max_speed,
                time_horizon=time_horizon,
                neighbor_dist=neighbor_dist,
                goal=xy[-1].copy(),
            )
        )
    return agents


def replay_step_single(dataset: TrajectoryDataset, pid: int, t: float) -> np.ndarray | None:
    frames, xy = dataset.tracks[pid]
    times = frames * dataset.frame_dt
    if t < times[0] or t > times[-1]:
        return None
    return np.array([np.interp(t, times, xy[:, 0]), np.interp(t, times, xy[:, 1])])


def synthetic_crowd(
    seed: int,
    n_groups: int,
    group_sizes=(2, 3),
    flow=(0.0, 1.0),
    area=(10.0, 9.0),
    duration: float = 30.0,
    dt: float = 0.1,
    speed_range=(1.1, 1.4),
    dominant_fraction: float = 0.7,
) -> TrajectoryDataset:
    """Generate group-coherent reactive pedestrians and record their trajectories.

    Group members spawn within 1 m of their leader and share a goal straight
    across the area along the flow axis (a minority walks against it).
    Deterministic for a fixed seed; frame numbering is one frame per dt.
    """
    rng = np.random.default_rng(seed)
    width, height = float(area[0]), float(area[1])
    flow = np.asarray(flow, dtype=float)
    flow = flow / np.hypot(*flow)
    # axis 1 = along the flow, axis 0 = across it; flows are axis-aligned
    along_y = abs(flow[1]) >= abs(flow[0])
    along_extent = height if along_y else width
    cross_extent = width if along_y else height

    def compose(cross, along):
        return np.array([cross, along]) if along_y else np.array([along, cross])

    # Spread lanes across the width so opposing groups pass laterally instead
    # of head-on; members walk abreast, spawning within 1 m of each other.
    lane_order = rng.permutation(n_groups)
    agents: list[OrcaAgent] = []
    for g in range(n_groups):
        size = int(rng.integers(group_sizes[0], group_sizes[1] + 1))
        with_flow = rng.random() < dominant_fraction
        sign = (1.0 if (flow[1] if along_y else flow[0]) >= 0 else -1.0) * (1.0 if with_flow else -1.0)
        speed = rng.uniform(*speed_range)
        lane = (lane_order[g] + 0.5) / n_groups * (0.8 * cross_extent) + 0.1 * cross_extent
        lane += rng.uniform(-0.2, 0.2)
        back = rng.uniform(0.0, 0.35) * along_extent
        start_along = back if sign > 0 else along_extent - back
        goal_along = along_extent if sign > 0 else 0.0
        for m in range(size):
            abreast = (m - (size - 1) / 2.0) * 0.7 + rng.uniform(-0.1, 0.1)
            stagger = rng.uniform(-0.15, 0.15)
            start = compose(lane + abreast, start_along + stagger)
            goal = compose(lane + abreast, goal_along + stagger)
            agents.append(
                OrcaAgent(
                    position=start,
                    velocity=np.zeros(2),
                    pref_velocity=compose(0.0, sign * speed),
                    max_speed=speed,
                    goal=goal,
                )
            )

    n_steps = int(round(duration / dt))
    paths = [[a.position.copy()] for a in agents]
    for _ in range(n_steps):
        agents = orca_step(agents, robot=None, dt=dt)
        for i, a in enumerate(agents):
            paths[i].append(a.position.copy())

    tracks = {}
    for i, path in enumerate(paths):
        frames = np.arange(len(path), dtype=float)
        tracks[i] = (frames, np.array(path))
    return TrajectoryDataset(tracks=tracks, frame_dt=dt)

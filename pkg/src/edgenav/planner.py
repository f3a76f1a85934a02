"""Sampling-based MPC over group spaces or individual entities.

Candidates are constant velocity commands held over the horizon: a
deterministic grid plus optional seeded random extras. Each candidate is
rolled out, scored with a discounted sum of goal-progress and
group-proximity costs, and the cheapest wins (ties to the lowest index).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .geometry import GEOM_EPS, as_point, polygon_distance_batch
from .grouping import GroupingParams
from .prediction import HullTrack, KeypointHistory, OracleUnavailable, keypoint_futures
from .sensing import AugmentedEntity, entity_velocity

log = logging.getLogger(__name__)


class PlannerDegenerate(RuntimeError):
    """No candidate produced a finite cost."""


@dataclass(frozen=True)
class MpcParams:
    horizon: int = 8                 # K control steps; equals the prediction horizon
    gamma: float = 0.9               # per-step discount, applied from step 1
    lam: float = 0.5                 # goal-progress weight; 1 - lam weighs proximity
    dt: float = 0.1                  # s
    v_max: float = 1.75              # m/s
    omega_max: float = float(np.deg2rad(45.0))  # rad/s, non-holonomic mode
    n_samples: int = 65              # total candidates incl. the deterministic grid
    drive_mode: str = "holonomic"    # or "nonholonomic"
    seed: int = 0
    d0: float = 1.0                  # m, distance normalization inside exp(-D/d0)

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.drive_mode not in ("holonomic", "nonholonomic"):
            raise ValueError("drive_mode must be holonomic or nonholonomic")


@dataclass
class RobotState:
    position: np.ndarray            # (2,)
    heading: float = 0.0            # used in non-holonomic mode

    def __post_init__(self):
        self.position = as_point(self.position)


@dataclass
class ControlPlan:
    actions: np.ndarray             # (K, 2): (vx, vy) or (v, omega)
    states: list[RobotState]        # K + 1 states including the start
    cost: float


def candidate_actions(params: MpcParams) -> np.ndarray:
    """Deterministic action grid plus seeded random extras; (C, 2)."""
    speeds = params.v_max * np.array([0.25, 0.5, 0.75, 1.0])
    if params.drive_mode == "holonomic":
        bearings = 2.0 * np.pi * np.arange(16) / 16.0
        grid = [
            [s * np.cos(b), s * np.sin(b)] for s in speeds for b in bearings
        ]
        grid.append([0.0, 0.0])
    else:
        omegas = np.linspace(-params.omega_max, params.omega_max, 9)
        grid = [[s, w] for s in speeds for w in omegas]
    grid = np.array(grid)
    n_extra = max(0, params.n_samples - grid.shape[0])
    if n_extra:
        rng = np.random.default_rng(params.seed)
        if params.drive_mode == "holonomic":
            ang = rng.uniform(0.0, 2.0 * np.pi, n_extra)
            spd = rng.uniform(0.0, params.v_max, n_extra)
            extra = np.column_stack((spd * np.cos(ang), spd * np.sin(ang)))
        else:
            extra = np.column_stack(
                (
                    rng.uniform(0.0, params.v_max, n_extra),
                    rng.uniform(-params.omega_max, params.omega_max, n_extra),
                )
            )
        grid = np.vstack((grid, extra))
    return grid


def rollout(s0: RobotState, actions, params: MpcParams) -> list[RobotState]:
    """Integrate the discrete transition model; returns K + 1 states incl. s0."""
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    states = [RobotState(position=s0.position.copy(), heading=s0.heading)]
    pos = s0.position.copy()
    heading = s0.heading
    for u in actions:
        if params.drive_mode == "holonomic":
            pos = pos + u * params.dt
        else:
            heading = heading + u[1] * params.dt
            pos = pos + u[0] * params.dt * np.array([np.cos(heading), np.sin(heading)])
        states.append(RobotState(position=pos.copy(), heading=heading))
    return states


def _rollout_positions(s0: RobotState, cands: np.ndarray, params: MpcParams) -> np.ndarray:
    """Batched rollout of constant actions; positions (C, K+1, 2)."""
    C = cands.shape[0]
    K = params.horizon
    if params.drive_mode == "holonomic":
        incr = np.broadcast_to(cands[:, None, :] * params.dt, (C, K, 2))
    else:
        w = cands[:, 1][:, None]
        v = cands[:, 0][:, None]
        headings = s0.heading + np.cumsum(np.broadcast_to(w * params.dt, (C, K)), axis=1)
        incr = np.stack(
            (v * params.dt * np.cos(headings), v * params.dt * np.sin(headings)), axis=-1
        )
    pos = np.concatenate(
        (np.zeros((C, 1, 2)), np.cumsum(incr, axis=1)), axis=1
    )
    return s0.position + pos


def step_cost(s_next, spaces, goal, lam: float, d0: float = 1.0, goal_norm: float | None = None) -> float:
    """lam * goal progress + (1 - lam) * exp(-D / d0) against the nearest space.

    goal_norm defaults to the current distance to goal; pass the trial-start
    distance for the benchmark's normalization. Empty spaces zero the
    proximity term.
    """
    p = as_point(s_next)
    goal = as_point(goal)
    if goal_norm is None:
        goal_norm = float(np.linalg.norm(p - goal))
    goal_norm = max(goal_norm, GEOM_EPS)
    jg = min(2.0, float(np.linalg.norm(p - goal)) / goal_norm)
    spaces = list(spaces)
    if spaces:
        d = min(float(polygon_distance_batch(p[None, :], s.shape)[0]) for s in spaces)
        jd = float(np.exp(-d / d0))
    else:
        jd = 0.0
    return lam * jg + (1.0 - lam) * jd


def _batch_polygon_distance(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from points (C, 2) to per-candidate polygons verts (C, V, 2)."""
    a = verts
    b = np.roll(verts, -1, axis=1)
    d = b - a
    denom = np.einsum("cvj,cvj->cv", d, d)
    rel = points[:, None, :] - a
    t = np.einsum("cvj,cvj->cv", rel, d)
    safe = np.maximum(denom, GEOM_EPS * GEOM_EPS)
    t = np.clip(np.where(denom > GEOM_EPS * GEOM_EPS, t / safe, 0.0), 0.0, 1.0)
    foot = a + t[..., None] * d
    dist = np.linalg.norm(points[:, None, :] - foot, axis=-1).min(axis=1)

    x = points[:, 0]
    y = points[:, 1]
    inside = np.zeros(points.shape[0], dtype=bool)
    for i in range(verts.shape[1]):
        x1, y1 = verts[:, i, 0], verts[:, i, 1]
        x2, y2 = b[:, i, 0], b[:, i, 1]
        cond = (y1 > y) != (y2 > y)
        dy = y2 - y1
        xi = np.where(np.abs(dy) > GEOM_EPS, (x2 - x1) * (y - y1) / np.where(dy == 0, 1.0, dy) + x1, np.inf)
        inside ^= cond & (x < xi)
    return np.where(inside, 0.0, dist)


def _pentagon_vertices_batch(points: np.ndarray, p_l, p_c, p_r, offset_d: float) -> np.ndarray:
    """Per-candidate pentagon vertices (C, 5, 2) with offsets away from each point."""
    C = points.shape[0]

    def off(p):
        u = p[None, :] - points
        n = np.linalg.norm(u, axis=1, keepdims=True)
        unit = np.where(n > GEOM_EPS, u / np.maximum(n, GEOM_EPS), 0.0)
        return p[None, :] + offset_d * unit

    tile = lambda p: np.broadcast_to(np.asarray(p, dtype=float), (C, 2))
    return np.stack((tile(p_l), tile(p_c), tile(p_r), off(np.asarray(p_r)), off(np.asarray(p_l))), axis=1)


def _select_plan(s0, cands, positions, costs, params) -> ControlPlan:
    if bool(np.isnan(costs).all()):
        raise PlannerDegenerate("planner degenerate")
    i = int(np.nanargmin(costs))
    actions = np.tile(cands[i], (params.horizon, 1))
    states = rollout(s0, actions, params)
    return ControlPlan(actions=actions, states=states, cost=float(costs[i]))


def _accumulate(costs, pk, D, goal, lam, gamma_k, d0, goal_norm, cost_scale):
    jd = np.where(np.isfinite(D), np.exp(-D / d0), 0.0)
    jg = np.clip(np.linalg.norm(pk - goal, axis=1) / goal_norm, 0.0, 2.0)
    costs += gamma_k * cost_scale * (lam * jg + (1.0 - lam) * jd)


def plan(
    s0: RobotState,
    histories: dict[int, KeypointHistory],
    oracle,
    goal,
    params: MpcParams,
    grouping: GroupingParams,
    extra_spaces=(),
    goal_norm: float | None = None,
    cost_scale: float = 1.0,
) -> ControlPlan:
    """Sampling MPC over predicted pentagon group spaces.

    The prediction horizon equals the control horizon; predicted key points
    are re-offset per candidate using that candidate's own rollout position
    at each step. An unavailable external oracle falls back to frozen
    current spaces for this cycle (logged).
    """
    goal = as_point(goal)
    cands = candidate_actions(params)
    positions = _rollout_positions(s0, cands, params)
    if goal_norm is None:
        goal_norm = float(np.linalg.norm(s0.position - goal))
    goal_norm = max(goal_norm, GEOM_EPS)

    futures = None
    if oracle != "none" and histories:
        try:
            futures = keypoint_futures(histories, oracle, _FParams(params.horizon))
        except OracleUnavailable:
            log.warning("oracle unavailable; falling back to frozen spaces for this cycle")
            futures = None

    frozen = [s.shape for s in extra_spaces]
    if futures is None:
        frozen += [
            histories[hid].last_space.shape
            for hid in sorted(histories)
            if histories[hid].last_space is not None
        ]

    costs = np.zeros(cands.shape[0])
    for k in range(1, params.horizon + 1):
        pk = positions[:, k, :]
        D = np.full(cands.shape[0], np.inf)
        for shape in frozen:
            D = np.minimum(D, polygon_distance_batch(pk, shape))
        if futures is not None:
            for hid in sorted(futures):
                fc, fl, fr = futures[hid]
                verts = _pentagon_vertices_batch(pk, fl[k - 1], fc[k - 1], fr[k - 1], grouping.offset_d)
                D = np.minimum(D, _batch_polygon_distance(pk, verts))
        _accumulate(costs, pk, D, goal, params.lam, params.gamma ** k, params.d0, goal_norm, cost_scale)
    return _select_plan(s0, cands, positions, costs, params)


class _FParams:
    """Minimal future-horizon carrier for external oracle queries."""

    def __init__(self, f: int):
        self.f = f


def plan_entities(
    s0: RobotState,
    entities: list[AugmentedEntity],
    goal,
    params: MpcParams,
    predict: str = "linear",
    goal_norm: float | None = None,
    cost_scale: float = 1.0,
) -> ControlPlan:
    """Entity-level baseline: D is the distance to the nearest predicted entity.

    predict "linear" advances each entity at constant velocity; "none"
    freezes current positions.
    """
    goal = as_point(goal)
    cands = candidate_actions(params)
    positions = _rollout_positions(s0, cands, params)
    if goal_norm is None:
        goal_norm = float(np.linalg.norm(s0.position - goal))
    goal_norm = max(goal_norm, GEOM_EPS)

    if entities:
        pos0 = np.array([e.position for e in entities])
        vel = np.array([entity_velocity(e) for e in entities])
        if predict == "none":
            vel = np.zeros_like(vel)
    costs = np.zeros(cands.shape[0])
    for k in range(1, params.horizon + 1):
        pk = positions[:, k, :]
        if entities:
            ent_k = pos0 + k * params.dt * vel
            D = np.linalg.norm(pk[:, None, :] - ent_k[None, :, :], axis=-1).min(axis=1)
        else:
            D = np.full(cands.shape[0], np.inf)
        _accumulate(costs, pk, D, goal, params.lam, params.gamma ** k, params.d0, goal_norm, cost_scale)
    return _select_plan(s0, cands, positions, costs, params)


def plan_hulls(
    s0: RobotState,
    tracks: dict[int, HullTrack],
    goal,
    params: MpcParams,
    predict: str = "linear",
    goal_norm: float | None = None,
) -> ControlPlan:
    """Hull-representation baseline: hulls ride their centroid velocity.

    Predicted hulls are rigid translations, so they are shared across
    candidates at each step.
    """
    goal = as_point(goal)
    cands = candidate_actions(params)
    positions = _rollout_positions(s0, cands, params)
    if goal_norm is None:
        goal_norm = float(np.linalg.norm(s0.position - goal))
    goal_norm = max(goal_norm, GEOM_EPS)

    per_step_verts: list[list[np.ndarray]] = [[] for _ in range(params.horizon)]
    for hid in sorted(tracks):
        track = tracks[hid]
        if track.last_space is None:
            continue
        verts = track.last_space.vertices
        if predict == "linear" and len(track.centroids) > 1:
            newest = np.asarray(track.centroids[-1], dtype=float)
            oldest = np.asarray(track.centroids[0], dtype=float)
            shift = (newest - oldest) / (len(track.centroids) - 1)
        else:
            shift = np.zeros(2)
        for k in range(params.horizon):
            per_step_verts[k].append(verts + (k + 1) * shift)

    costs = np.zeros(cands.shape[0])
    for k in range(1, params.horizon + 1):
        pk = positions[:, k, :]
        D = np.full(cands.shape[0], np.inf)
        for verts in per_step_verts[k - 1]:
            D = np.minimum(D, polygon_distance_batch(pk, verts))
        _accumulate(costs, pk, D, goal, params.lam, params.gamma ** k, params.d0, goal_norm, cost_scale=1.0)
    return _select_plan(s0, cands, positions, costs, params)

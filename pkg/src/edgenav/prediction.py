"""Key-point history tracking and pluggable future-space oracles.

A pentagon group space is fully described by three tracked key points, so
prediction reduces to forecasting three short 2D trajectories per group. The
oracle slot accepts "none" (freeze current spaces), "linear"
(constant-velocity), or an :class:`ExternalOracle` speaking newline-delimited
JSON over a subprocess pipe.
"""

from __future__ import annotations

import json
import select
import subprocess
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pentagon, as_points
from .grouping import GroupSpace, build_pentagon

ORACLE_KINDS = ("none", "linear", "external")


class OracleUnavailable(RuntimeError):
    """The external oracle failed to answer in time."""


@dataclass(frozen=True)
class PredictionParams:
    h: int = 8                        # history steps kept per key point
    f: int = 8                        # future steps predicted
    association_radius: float = 1.0   # m, greedy track association gate

    def __post_init__(self):
        if self.h < 1 or self.f < 1:
            raise ValueError("h and f must be >= 1")


@dataclass
class KeypointHistory:
    """Time series of (p_c, p_l, p_r) for one tracked group, oldest first."""

    group_id: int
    tau_c: list = field(default_factory=list)
    tau_l: list = field(default_factory=list)
    tau_r: list = field(default_factory=list)
    last_update: int = 0
    last_space: GroupSpace | None = None

    def newest_centroid(self) -> np.ndarray:
        return (self.tau_c[-1] + self.tau_l[-1] + self.tau_r[-1]) / 3.0


def _space_centroid(space: GroupSpace) -> np.ndarray:
    p_l, p_c, p_r = space.keypoints
    return (p_c + p_l + p_r) / 3.0


def update_histories(
    histories: dict[int, KeypointHistory],
    spaces: list[GroupSpace],
    t: int,
    params: PredictionParams,
) -> dict[int, KeypointHistory]:
    """Associate incoming pentagon spaces to tracks and roll histories forward.

    Greedy closest-first matching within association_radius; unmatched spaces
    start fresh tracks; tracks unmatched for more than 2 steps are dropped.
    Returns a new dict; inputs are not mutated.
    """
    incoming = [s for s in spaces if s.keypoints is not None]
    hist_ids = list(histories)
    pairs = []
    for hid in hist_ids:
        hc = histories[hid].newest_centroid()
        for si, space in enumerate(incoming):
            d = float(np.linalg.norm(hc - _space_centroid(space)))
            if d <= params.association_radius:
                pairs.append((d, hid, si))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))

    matched_h: set[int] = set()
    matched_s: set[int] = set()
    out: dict[int, KeypointHistory] = {}
    for d, hid, si in pairs:
        if hid in matched_h or si in matched_s:
            continue
        matched_h.add(hid)
        matched_s.add(si)
        h = histories[hid]
        p_l, p_c, p_r = incoming[si].keypoints
        out[hid] = KeypointHistory(
            group_id=hid,
            tau_c=(h.tau_c + [np.array(p_c)])[-params.h:],
            tau_l=(h.tau_l + [np.array(p_l)])[-params.h:],
            tau_r=(h.tau_r + [np.array(p_r)])[-params.h:],
            last_update=t,
            last_space=incoming[si],
        )

    for hid in hist_ids:
        if hid in matched_h:
            continue
        h = histories[hid]
        if t - h.last_update <= 2:
            out[hid] = h
    next_id = max(hist_ids, default=-1) + 1
    for si, space in enumerate(incoming):
        if si in matched_s:
            continue
        p_l, p_c, p_r = space.keypoints
        out[next_id] = KeypointHistory(
            group_id=next_id,
            tau_c=[np.array(p_c)],
            tau_l=[np.array(p_l)],
            tau_r=[np.array(p_r)],
            last_update=t,
            last_space=space,
        )
        next_id += 1
    return out


def _linear_future(points: list, f: int, step: float = 1.0) -> np.ndarray:
    """Constant-velocity extrapolation of a point list; (f, 2) array."""
    newest = np.asarray(points[-1], dtype=float)
    if len(points) == 1:
        return np.tile(newest, (f, 1))
    oldest = np.asarray(points[0], dtype=float)
    v = (newest - oldest) / ((len(points) - 1) * step)
    ks = np.arange(1, f + 1)[:, None] * step
    return newest + ks * v


def predict_keypoints_linear(history: KeypointHistory, f: int, dt: float):
    """Constant-velocity futures for (tau_c, tau_l, tau_r), each length f.

    Velocity is (newest - oldest) / ((len - 1) * dt); a length-1 history
    predicts f copies of its single point.
    """
    return (
        _linear_future(history.tau_c, f, dt),
        _linear_future(history.tau_l, f, dt),
        _linear_future(history.tau_r, f, dt),
    )


def keypoint_futures(
    histories: dict[int, KeypointHistory],
    oracle,
    params: PredictionParams,
) -> dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Future (tau_c, tau_l, tau_r) per track, each (f, 2).

    History spacing equals prediction spacing, so the timestep cancels out of
    the constant-velocity form and no dt is needed here.
    """
    if isinstance(oracle, ExternalOracle):
        return oracle.query(histories, params.f)
    if oracle == "linear":
        return {hid: predict_keypoints_linear(h, params.f, 1.0) for hid, h in histories.items()}
    raise ValueError(f"unknown oracle {oracle!r}")


def predict_group_spaces(
    histories: dict[int, KeypointHistory],
    oracle,
    params: PredictionParams,
    robot_future,
    offset_d: float,
) -> list[list[GroupSpace]]:
    """Per-future-step group spaces, length f.

    oracle "none" replicates each track's current space. Other oracles
    predict the key points and rebuild the pentagon per step with offsets
    taken away from the planner's candidate position at that step.
    """
    robot_future = as_points(robot_future)
    if robot_future.shape[0] != params.f:
        raise ValueError("robot_future length must equal f")
    ordered = sorted(histories)
    if oracle == "none":
        current = [histories[hid].last_space for hid in ordered if histories[hid].last_space is not None]
        return [list(current) for _ in range(params.f)]

    futures = keypoint_futures(histories, oracle, params)
    steps: list[list[GroupSpace]] = []
    for k in range(params.f):
        spaces_k = []
        for hid in ordered:
            fc, fl, fr = futures[hid]
            kp = (fl[k], fc[k], fr[k])
            shape = build_pentagon(kp, robot_future[k], offset_d)
            spaces_k.append(
                GroupSpace(group_id=hid, shape=shape, keypoints=kp if isinstance(shape, Pentagon) else None)
            )
        steps.append(spaces_k)
    return steps


# ---------------------------------------------------------------------------
# Convex-hull baseline tracking: the hull is predicted by rigid translation
# of its centroid, so only a centroid history is kept per track.

@dataclass
class HullTrack:
    group_id: int
    centroids: list = field(default_factory=list)
    last_update: int = 0
    last_space: GroupSpace | None = None


def update_hull_tracks(
    tracks: dict[int, HullTrack],
    spaces: list[GroupSpace],
    t: int,
    params: PredictionParams,
) -> dict[int, HullTrack]:
    """Greedy centroid association for hull spaces, mirroring update_histories."""
    incoming = list(spaces)
    cents = [s.vertices.mean(axis=0) for s in incoming]
    pairs = []
    for hid, track in tracks.items():
        for si, c in enumerate(cents):
            d = float(np.linalg.norm(track.centroids[-1] - c))
            if d <= params.association_radius:
                pairs.append((d, hid, si))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))
    matched_h: set[int] = set()
    matched_s: set[int] = set()
    out: dict[int, HullTrack] = {}
    for d, hid, si in pairs:
        if hid in matched_h or si in matched_s:
            continue
        matched_h.add(hid)
        matched_s.add(si)
        track = tracks[hid]
        out[hid] = HullTrack(
            group_id=hid,
            centroids=(track.centroids + [cents[si]])[-params.h:],
            last_update=t,
            last_space=incoming[si],
        )
    for hid, track in tracks.items():
        if hid not in matched_h and t - track.last_update <= 2:
            out[hid] = track
    next_id = max(tracks, default=-1) + 1
    for si, space in enumerate(incoming):
        if si not in matched_s:
            out[next_id] = HullTrack(
                group_id=next_id, centroids=[cents[si]], last_update=t, last_space=space
            )
            next_id += 1
    return out


def predict_hull_linear(space: GroupSpace, centroid_history: list, f: int, dt: float) -> list[GroupSpace]:
    """Rigidly translate the hull by its centroid's constant velocity, f steps."""
    if not centroid_history:
        raise ValueError("centroid history must be non-empty")
    newest = np.asarray(centroid_history[-1], dtype=float)
    if len(centroid_history) == 1:
        v = np.zeros(2)
    else:
        v = (newest - np.asarray(centroid_history[0], dtype=float)) / ((len(centroid_history) - 1) * dt)
    out = []
    for k in range(1, f + 1):
        shifted = type(space.shape)(space.vertices + k * dt * v)
        out.append(GroupSpace(group_id=space.group_id, shape=shifted, keypoints=None))
    return out


# ---------------------------------------------------------------------------
# External oracle over a subprocess pipe.
#
# Request (one line):  {"histories": [{"group_id": 0, "tau_c": [[x, y], ...],
#                       "tau_l": [...], "tau_r": [...]}, ...], "f": 8}
# Response (one line): {"futures": [{"group_id": 0, "tau_c": [[x, y] * f],
#                       "tau_l": [...], "tau_r": [...]}, ...]}

class ExternalOracle:
    """Line-oriented JSON oracle running as a child process.

    A response slower than the timeout marks the oracle dead (the pipe would
    desynchronize otherwise) and raises :class:`OracleUnavailable`.
    """

    def __init__(self, cmd, timeout: float = 0.05):
        self.cmd = list(cmd)
        self.timeout = float(timeout)
        self._proc: subprocess.Popen | None = None
        self._dead = False

    def _ensure_started(self):
        if self._proc is None:
            self._proc = subprocess.Popen(
                self.cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )

    def query(self, histories: dict[int, KeypointHistory], f: int):
        if self._dead:
            raise OracleUnavailable("oracle unavailable")
        self._ensure_started()
        req = {
            "histories": [
                {
                    "group_id": hid,
                    "tau_c": [[float(x), float(y)] for x, y in h.tau_c],
                    "tau_l": [[float(x), float(y)] for x, y in h.tau_l],
                    "tau_r": [[float(x), float(y)] for x, y in h.tau_r],
                }
                for hid, h in sorted(histories.items())
            ],
            "f": int(f),
        }
        try:
            self._proc.stdin.write(json.dumps(req) + "\n")
            self._proc.stdin.flush()
            ready, _, _ = select.select([self._proc.stdout], [], [], self.timeout)
            if not ready:
                self._dead = True
                raise OracleUnavailable("oracle unavailable")
            line = self._proc.stdout.readline()
        except OracleUnavailable:
            raise
        except (OSError, ValueError) as exc:
            self._dead = True
            raise OracleUnavailable("oracle unavailable") from exc
        if not line:
            self._dead = True
            raise OracleUnavailable("oracle unavailable")
        resp = json.loads(line)
        futures = {}
        for item in resp["futures"]:
            arrs = tuple(
                np.asarray(item[key], dtype=float).reshape(f, 2)
                for key in ("tau_c", "tau_l", "tau_r")
            )
            futures[int(item["group_id"])] = arrs
        if set(futures) != set(histories):
            self._dead = True
            raise OracleUnavailable("oracle unavailable")
        return futures

    def close(self):
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            self._proc.terminate()
            self._proc.wait(timeout=5)
            self._proc = None

    def __enter__(self):
        self._ensure_started()
        return self

    def __exit__(self, *exc):
        self.close()
        return False

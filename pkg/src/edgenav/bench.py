"""Benchmark harness: scenarios, trial execution, metrics, statistics, export.

A trial runs the full perception -> grouping -> prediction -> planning loop
against a replayed (offline) or reactive (online) crowd, terminating on
collision, goal arrival, or timeout. Trials are deterministic given their
seeds; per-step wall-clock timing is recorded only when requested so that
result files stay byte-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from .crowd import (
    OrcaAgent,
    TrajectoryDataset,
    agents_from_dataset,
    orca_step,
    replay_step,
    replay_step_single,
    synthetic_crowd,
)
from .grouping import GroupingParams, build_edge_spaces, build_hull_spaces
from .planner import MpcParams, RobotState, plan, plan_entities, plan_hulls
from .prediction import ExternalOracle, PredictionParams, update_histories, update_hull_tracks
from .sensing import LidarConfig, SensorOccluded, augment_pedestrians, augment_scan, simulate_scan

METHODS = ("ped", "lidar", "group-hull", "group-edge")
PREDICTORS = ("nopred", "linear", "external")


@dataclass(frozen=True)
class CrowdConfig:
    """Reactive-crowd and scan-clustering parameters."""

    radius: float = 0.3
    max_speed: float = 1.4
    time_horizon: float = 2.0
    neighbor_dist: float = 5.0
    scan_eps: float = 0.5          # m, DBSCAN eps over scan points
    # Static-obstacle size filter. Adjacent group members' scan arcs chain
    # into one cluster (gaps < scan_eps), so the cutoff must sit above a
    # three-abreast group (~2.4 m) while still catching walls.
    scan_max_extent: float = 4.0
    gating_radius: float = 1.0     # m, cluster association gate


@dataclass(frozen=True)
class ScenarioSpec:
    task: str = "cross"                  # robot vs. dominant crowd direction
    mode: str = "online"                 # offline = replay, online = reactive
    perception: str = "perfect"          # perfect | lidar
    method: str = "group-edge"           # ped | lidar | group-hull | group-edge
    predictor: str = "linear"            # nopred | linear | external
    area: tuple = (12.0, 10.0)
    test_region: tuple = (2.5, 2.0, 9.5, 8.0)   # xmin, ymin, xmax, ymax
    robot_start: tuple = (0.5, 5.0)
    robot_goal: tuple = (11.5, 5.0)
    min_peds: int = 5
    timeout: float = 60.0
    goal_radius: float = 0.5
    collision_radius: float = 0.5
    n_groups: int = 4
    group_size_range: tuple = (2, 3)
    flow: tuple = (0.0, 1.0)
    source: str = "synthetic"            # synthetic | dataset
    dataset_path: str | None = None
    dataset_frame_dt: float = 0.04

    def __post_init__(self):
        if self.task not in ("cross", "flow"):
            raise ValueError("task must be cross or flow")
        if self.mode not in ("offline", "online"):
            raise ValueError("mode must be offline or online")
        if self.perception not in ("perfect", "lidar"):
            raise ValueError("perception must be perfect or lidar")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.predictor not in PREDICTORS:
            raise ValueError(f"predictor must be one of {PREDICTORS}")
        if self.method == "ped" and self.perception != "perfect":
            raise ValueError("method 'ped' requires perfect perception")
        if self.method == "lidar" and self.perception != "lidar":
            raise ValueError("method 'lidar' requires lidar perception")
        if self.method in ("ped", "lidar", "group-hull") and self.predictor == "external":
            raise ValueError("external predictor is only supported for group-edge")
        if self.min_peds < 1:
            raise ValueError("min_peds must be >= 1")
        xmin, ymin, xmax, ymax = self.test_region
        for name, p in (("robot_start", self.robot_start), ("robot_goal", self.robot_goal)):
            if xmin < p[0] < xmax and ymin < p[1] < ymax:
                raise ValueError(f"{name} must lie outside the test region interior")

    @property
    def label(self) -> str:
        return f"{self.method}-{self.predictor}"


@dataclass
class TrialResult:
    success: bool
    outcome: str                   # reached | collision | timeout
    min_dist: float
    path_length: float
    mean_step_time: float
    trajectory: list               # [(t, (x, y)), ...]
    seed: int
    method_label: str = ""
    trial_start: float = 0.0
    frames: list = field(default_factory=list)       # render payload, optional
    step_times: list = field(default_factory=list)   # per-step seconds when timed

    def to_dict(self) -> dict:
        d = asdict(self)
        d["min_dist"] = None if math.isinf(self.min_dist) else self.min_dist
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrialResult":
        d = dict(d)
        if d.get("min_dist") is None:
            d["min_dist"] = float("inf")
        d["trajectory"] = [(float(t), (float(p[0]), float(p[1]))) for t, p in d["trajectory"]]
        return cls(**d)


@dataclass
class AggregateReport:
    methods: dict                  # label -> {"sr", "min_dist", "path_length", "step_time", "n"}
    trials: dict                   # label -> list[TrialResult]


def region_occupancy(dataset: TrajectoryDataset, region, t: float) -> int:
    xmin, ymin, xmax, ymax = region
    n = 0
    for _, p in replay_step(dataset, t):
        if xmin <= p[0] <= xmax and ymin <= p[1] <= ymax:
            n += 1
    return n


def generate_trials(dataset: TrajectoryDataset, spec: ScenarioSpec, cooldown: float = 5.0, dt: float = 0.1) -> list[float]:
    """Start times where at least min_peds pedestrians occupy the test region,
    separated by at least the cool-down."""
    t0, t1 = dataset.time_range
    starts: list[float] = []
    last = -math.inf
    for t in np.arange(t0, t1 + 1e-9, dt):
        if t - last < cooldown:
            continue
        if region_occupancy(dataset, spec.test_region, float(t)) >= spec.min_peds:
            starts.append(round(float(t), 6))
            last = t
    return starts


def build_scene(spec: ScenarioSpec, seed: int, duration: float = 30.0, dt: float = 0.1) -> TrajectoryDataset:
    """Synthetic crowd for one scenario seed."""
    return synthetic_crowd(
        seed=seed,
        n_groups=spec.n_groups,
        group_sizes=spec.group_size_range,
        flow=spec.flow,
        area=spec.area,
        duration=duration,
        dt=dt,
    )


SPAWN_CLEARANCE = 1.5  # m: the robot must not materialize on top of a pedestrian


def scene_for_seed(spec: ScenarioSpec, seed: int, duration: float = 30.0, dt: float = 0.1):
    """(dataset, trial_start) for one seed; falls back to peak occupancy.

    Candidate start times additionally require the robot start position to be
    clear of pedestrians so trials never open inside a collision.
    """
    dataset = build_scene(spec, seed, duration, dt)
    start_pos = np.asarray(spec.robot_start, dtype=float)

    def clear(t):
        return all(
            float(np.linalg.norm(start_pos - p)) >= SPAWN_CLEARANCE
            for _, p in replay_step(dataset, t)
        )

    starts = [t for t in generate_trials(dataset, spec, cooldown=5.0, dt=dt) if clear(t)]
    if starts:
        return dataset, starts[0]
    t0, t1 = dataset.time_range
    ts = np.arange(t0, t1 + 1e-9, dt)
    occ = [
        region_occupancy(dataset, spec.test_region, float(t)) if clear(float(t)) else -1
        for t in ts
    ]
    return dataset, float(ts[int(np.argmax(occ))])


class _OfflineCrowd:
    """Replay driver: pedestrians follow the recording and ignore the robot."""

    def __init__(self, dataset: TrajectoryDataset, start: float):
        self.dataset = dataset
        self.start = start
        self.t = 0.0

    def positions(self) -> list:
        return replay_step(self.dataset, self.start + self.t)

    def step(self, robot_pos, robot_vel, robot_radius, dt: float):
        self.t += dt


class _OnlineCrowd:
    """Reactive driver: recorded state seeds agents that then run reciprocal
    avoidance, including late spawns at their recorded entry positions.
    An agent leaves the scene once it is at its recorded exit point and its
    recorded lifetime is over, mirroring how replayed pedestrians vanish
    after their last annotation (stationary pedestrians stay put)."""

    EXIT_TOL = 0.25  # m

    def __init__(self, dataset: TrajectoryDataset, start: float, cfg: CrowdConfig):
        self.dataset = dataset
        self.start = start
        self.cfg = cfg
        self.t = 0.0
        self.agents = agents_from_dataset(
            dataset, start,
            radius=cfg.radius, max_speed=cfg.max_speed,
            time_horizon=cfg.time_horizon, neighbor_dist=cfg.neighbor_dist,
        )
        self.ids = [pid for pid, _ in replay_step(dataset, start)]
        self.spawned = set(self.ids)

    def positions(self) -> list:
        return [(pid, a.position.copy()) for pid, a in zip(self.ids, self.agents)]

    def _end_time(self, pid) -> float:
        frames, _ = self.dataset.tracks[pid]
        return float(frames[-1]) * self.dataset.frame_dt

    def step(self, robot_pos, robot_vel, robot_radius, dt: float):
        self.agents = orca_step(self.agents, (robot_pos, robot_vel, robot_radius), dt)
        self.t += dt
        now = self.start + self.t
        keep = [
            i for i, a in enumerate(self.agents)
            if a.goal is None
            or float(np.linalg.norm(a.position - a.goal)) > self.EXIT_TOL
            or now < self._end_time(self.ids[i])
        ]
        self.agents = [self.agents[i] for i in keep]
        self.ids = [self.ids[i] for i in keep]
        for pid in sorted(self.dataset.tracks):
            if pid in self.spawned:
                continue
            frames, xy = self.dataset.tracks[pid]
            if frames[0] * self.dataset.frame_dt <= now:
                pos = replay_step_single(self.dataset, pid, now)
                if pos is None:
                    pos = xy[0].copy()
                self.agents.append(
                    OrcaAgent(
                        position=pos,
                        radius=self.cfg.radius, max_speed=self.cfg.max_speed,
                        time_horizon=self.cfg.time_horizon, neighbor_dist=self.cfg.neighbor_dist,
                        goal=xy[-1].copy(),
                    )
                )
                self.ids.append(pid)
                self.spawned.add(pid)


@dataclass
class RunConfig:
    """Everything one benchmark run needs; the CLI parses files into this."""

    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    mpc: MpcParams = field(default_factory=MpcParams)
    grouping: GroupingParams = field(default_factory=GroupingParams)
    prediction: PredictionParams = field(default_factory=PredictionParams)
    lidar: LidarConfig = field(default_factory=LidarConfig)
    crowd: CrowdConfig = field(default_factory=CrowdConfig)
    output_dir: str = "out"
    seeds: list[int] = field(default_factory=lambda: [0])
    external_oracle_cmd: list[str] | None = None
    external_oracle_timeout: float = 0.05


def run_trial(
    cfg: RunConfig,
    dataset: TrajectoryDataset,
    trial_start: float,
    seed: int,
    measure_time: bool = False,
    record_frames: bool = False,
) -> TrialResult:
    """Execute one trial; deterministic for fixed config, dataset, and seed.

    mean_step_time is 0.0 unless measure_time is set (wall-clock numbers are
    not reproducible and would break byte-identical reports).
    """
    spec = cfg.scenario
    mpc = replace(cfg.mpc, seed=seed)
    grouping = cfg.grouping
    pred = cfg.prediction
    dt = mpc.dt
    max_steps = int(round(spec.timeout / dt))

    goal = np.asarray(spec.robot_goal, dtype=float)
    start = np.asarray(spec.robot_start, dtype=float)
    robot = RobotState(position=start.copy(), heading=float(np.arctan2(*(goal - start)[::-1])))
    goal_norm = float(np.linalg.norm(start - goal))

    if spec.mode == "online":
        crowd = _OnlineCrowd(dataset, trial_start, cfg.crowd)
    else:
        crowd = _OfflineCrowd(dataset, trial_start)

    oracle = {"nopred": "none", "linear": "linear"}.get(spec.predictor)
    external = None
    if spec.predictor == "external":
        if not cfg.external_oracle_cmd:
            raise ValueError("external predictor requires external_oracle_cmd")
        external = ExternalOracle(cfg.external_oracle_cmd, timeout=cfg.external_oracle_timeout)
        oracle = external

    histories: dict = {}
    hull_tracks: dict = {}
    prev_peds = None
    prev_scan = None

    trajectory = [(0.0, (float(robot.position[0]), float(robot.position[1])))]
    frames: list = []
    min_dist = math.inf
    path_length = 0.0
    step_times: list[float] = []
    outcome = "timeout"

    try:
        for step in range(max_steps):
            t = step * dt
            peds = crowd.positions()
            if peds:
                d = min(float(np.linalg.norm(robot.position - p)) for _, p in peds)
                min_dist = min(min_dist, d)
                if d < spec.collision_radius:
                    outcome = "collision"
                    break
            if float(np.linalg.norm(robot.position - goal)) < spec.goal_radius:
                outcome = "reached"
                break

            tic = time.perf_counter() if measure_time else 0.0
            spaces_for_frame = []
            try:
                if spec.perception == "perfect":
                    entities = augment_pedestrians(peds, prev_peds, dt)
                else:
                    scan = simulate_scan(
                        robot.position,
                        [(p, cfg.lidar.pedestrian_radius) for _, p in peds],
                        cfg.lidar,
                        rng_seed=seed * 100003 + step,
                    )
                    entities = augment_scan(
                        scan, prev_scan, cfg.crowd.scan_eps, dt, cfg.crowd.scan_max_extent,
                        gating_radius=cfg.crowd.gating_radius,
                    )
                    prev_scan = scan
            except SensorOccluded:
                outcome = "collision"
                break

            if spec.method in ("ped", "lidar"):
                predict = "none" if spec.predictor == "nopred" else "linear"
                control = plan_entities(robot, entities, goal, mpc, predict=predict, goal_norm=goal_norm)
            elif spec.method == "group-edge":
                spaces = build_edge_spaces(entities, robot.position, grouping)
                pentagons = [s for s in spaces if s.keypoints is not None]
                extra = [s for s in spaces if s.keypoints is None]
                histories = update_histories(histories, pentagons, step, pred)
                control = plan(
                    robot, histories, oracle, goal, mpc, grouping,
                    extra_spaces=extra, goal_norm=goal_norm,
                )
                spaces_for_frame = spaces
            else:  # group-hull
                spaces = build_hull_spaces(entities, grouping)
                predict = "none" if spec.predictor == "nopred" else "linear"
                hull_tracks = update_hull_tracks(hull_tracks, spaces, step, pred)
                control = plan_hulls(robot, hull_tracks, goal, mpc, predict=predict, goal_norm=goal_norm)
                spaces_for_frame = spaces

            if measure_time:
                step_times.append(time.perf_counter() - tic)

            if record_frames:
                frames.append(
                    {
                        "t": round(t, 6),
                        "robot": [float(robot.position[0]), float(robot.position[1])],
                        "peds": [[float(p[0]), float(p[1])] for _, p in peds],
                        "groups": [
                            {
                                "id": int(s.group_id),
                                "kind": s.kind,
                                "vertices": [[float(x), float(y)] for x, y in s.vertices],
                            }
                            for s in spaces_for_frame
                        ],
                    }
                )

            action = control.actions[0]
            before = robot.position.copy()
            if mpc.drive_mode == "holonomic":
                robot.position = robot.position + action * dt
                robot_vel = action.copy()
            else:
                robot.heading = robot.heading + action[1] * dt
                robot_vel = action[0] * np.array([np.cos(robot.heading), np.sin(robot.heading)])
                robot.position = robot.position + robot_vel * dt
            path_length += float(np.linalg.norm(robot.position - before))
            trajectory.append((round((step + 1) * dt, 6), (float(robot.position[0]), float(robot.position[1]))))

            crowd.step(before, robot_vel, cfg.crowd.radius, dt)
            prev_peds = peds
    finally:
        if external is not None:
            external.close()

    return TrialResult(
        success=outcome == "reached",
        outcome=outcome,
        min_dist=min_dist,
        path_length=path_length,
        mean_step_time=float(np.mean(step_times)) if step_times else 0.0,
        trajectory=trajectory,
        seed=seed,
        method_label=spec.label,
        trial_start=trial_start,
        frames=frames,
        step_times=step_times,
    )


def aggregate(results: dict[str, list[TrialResult]]) -> AggregateReport:
    """Per-method means; collision trials contribute their recorded min_dist.

    Trials that never saw a pedestrian carry an infinite min_dist sentinel
    and are excluded from the MinD mean.
    """
    methods = {}
    for label, trials in results.items():
        if not trials:
            raise ValueError(f"no trials for method {label}")
        finite = [r.min_dist for r in trials if math.isfinite(r.min_dist)]
        methods[label] = {
            "sr": sum(r.success for r in trials) / len(trials),
            "min_dist": float(np.mean(finite)) if finite else math.inf,
            "path_length": float(np.mean([r.path_length for r in trials])),
            "step_time": float(np.mean([r.mean_step_time for r in trials])),
            "n": len(trials),
        }
    return AggregateReport(methods=methods, trials=dict(results))


# ---------------------------------------------------------------------------
# Statistics: Welch one-sided tests and TOST equivalence.

def welch_statistic(a, b, shift: float = 0.0) -> tuple[float, float]:
    """Welch t statistic and degrees of freedom for mean(a) - mean(b) - shift."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = len(a), len(b)
    va, vb = a.var(ddof=1), b.var(ddof=1)
    se_sq = va / na + vb / nb
    if se_sq == 0.0:
        return math.inf if (a.mean() - b.mean() - shift) > 0 else -math.inf, float(na + nb - 2)
    t = (a.mean() - b.mean() - shift) / math.sqrt(se_sq)
    df = se_sq**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return float(t), float(df)


def welch_one_sided(a, b, shift: float = 0.0) -> float:
    """p-value for the alternative mean(a) - mean(b) > shift (Welch)."""
    t, df = welch_statistic(a, b, shift)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    return float(stats.t.sf(t, df))


@dataclass(frozen=True)
class TostResult:
    p_lower: float
    p_upper: float
    p_tost: float
    equivalent: bool


def tost_equivalence(samples_a, samples_b, margin: float, alpha: float = 0.05) -> TostResult:
    """Two one-sided Welch tests of the mean difference against +/- margin.

    Success-rate samples are 0/1 vectors run through the same machinery.
    With zero variance in both samples the test degenerates: p = 0 when the
    mean difference is inside the margin, 1 otherwise.
    """
    a = np.asarray(samples_a, dtype=float)
    b = np.asarray(samples_b, dtype=float)
    if len(a) < 3 or len(b) < 3:
        raise ValueError("each sample needs n >= 3")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("samples must be finite")
    delta = a.mean() - b.mean()
    se_sq = a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b)
    if se_sq == 0.0:
        p = 0.0 if abs(delta) < margin else 1.0
        return TostResult(p_lower=p, p_upper=p, p_tost=p, equivalent=p < alpha)
    # H1 lower: delta > -margin; H1 upper: delta < +margin
    t_lower, df = welch_statistic(a, b, shift=-margin)
    t_upper, _ = welch_statistic(a, b, shift=margin)
    p_lower = float(stats.t.sf(t_lower, df))
    p_upper = float(stats.t.cdf(t_upper, df))
    p_tost = max(p_lower, p_upper)
    return TostResult(p_lower=p_lower, p_upper=p_upper, p_tost=p_tost, equivalent=p_tost < alpha)


# ---------------------------------------------------------------------------
# Export: per-trial CSV, aggregate JSON, per-trial SVG.

CSV_COLUMNS = (
    "method", "task", "mode", "perception", "seed",
    "outcome", "min_dist", "path_length", "mean_step_time",
)


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return f"{x:.6f}"


def write_trials_csv(report: AggregateReport, spec: ScenarioSpec, path) -> None:
    rows = []
    for label in sorted(report.trials):
        for r in sorted(report.trials[label], key=lambda r: r.seed):
            rows.append(
                [
                    label, spec.task, spec.mode, spec.perception, r.seed,
                    r.outcome, _fmt(r.min_dist), _fmt(r.path_length), _fmt(r.mean_step_time),
                ]
            )
    with Path(path).open("w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        w.writerows(rows)


def read_trials_csv(path) -> list[dict]:
    with Path(path).open("r", newline="", encoding="utf-8") as f:
        return [dict(row) for row in csv.DictReader(f)]


def write_aggregate_json(report: AggregateReport, path) -> None:
    payload = {
        label: {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in m.items()}
        for label, m in sorted(report.methods.items())
    }
    with Path(path).open("w", encoding="utf-8") as f:
        json.dump({"methods": payload}, f, indent=2, sort_keys=True)
        f.write("\n")


def format_table(report: AggregateReport) -> str:
    """Fixed-width table in SR / MinD / PL / Time column order."""
    lines = [f"{'method':<24} {'SR':>6} {'MinD (m)':>9} {'PL (m)':>8} {'Time (s)':>9} {'n':>4}"]
    for label in sorted(report.methods):
        m = report.methods[label]
        mind = "inf" if math.isinf(m["min_dist"]) else f"{m['min_dist']:.3f}"
        lines.append(
            f"{label:<24} {m['sr']:>6.3f} {mind:>9} {m['path_length']:>8.2f} "
            f"{m['step_time']:>9.4f} {m['n']:>4d}"
        )
    return "\n".join(lines)


def render_trial_svg(trial: dict, frame: int | None = None, size: float = 480.0) -> str:
    """Deterministic SVG: trajectory polyline, pedestrian dots, group-space
    polygons of the rendered frame, and a goal marker."""
    traj = trial["trajectory"]
    frames = trial.get("frames") or []
    if frame is None:
        frame = len(frames) - 1 if frames else 0
    if frames and not (0 <= frame < len(frames)):
        raise ValueError(f"frame {frame} out of range (0..{len(frames) - 1})")

    xs = [p[0] for _, p in traj]
    ys = [p[1] for _, p in traj]
    fr = frames[frame] if frames else None
    if fr:
        xs += [p[0] for p in fr["peds"]] + [v[0] for g in fr["groups"] for v in g["vertices"]]
        ys += [p[1] for p in fr["peds"]] + [v[1] for g in fr["groups"] for v in g["vertices"]]
    goal = trial.get("goal")
    if goal:
        xs.append(goal[0])
        ys.append(goal[1])
    pad = 1.0
    xmin, xmax = min(xs) - pad, max(xs) + pad
    ymin, ymax = min(ys) - pad, max(ys) + pad
    scale = size / max(xmax - xmin, ymax - ymin)

    def sx(x):
        return (x - xmin) * scale

    def sy(y):
        return (ymax - y) * scale  # flip so +y is up

    w = (xmax - xmin) * scale
    h = (ymax - ymin) * scale
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1f}" height="{h:.1f}" '
        f'viewBox="0 0 {w:.1f} {h:.1f}">',
        f'<rect width="{w:.1f}" height="{h:.1f}" fill="white"/>',
    ]
    if fr:
        for g in fr["groups"]:
            pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in g["vertices"])
            parts.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
        for x, y in fr["peds"]:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="red"/>')
    pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for _, (x, y) in [(t, p) for t, p in traj])
    parts.append(f'<polyline points="{pts}" fill="none" stroke="green" stroke-width="2"/>')
    if goal:
        parts.append(f'<circle cx="{sx(goal[0]):.2f}" cy="{sy(goal[1]):.2f}" r="6" fill="blue"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def trial_to_json(trial: TrialResult, spec: ScenarioSpec) -> dict:
    d = trial.to_dict()
    d["goal"] = list(spec.robot_goal)
    d["task"] = spec.task
    d["mode"] = spec.mode
    d["perception"] = spec.perception
    return d


def export_report(report: AggregateReport, spec: ScenarioSpec, out_dir, formats=("csv", "json", "svg")) -> list[Path]:
    """Write per-trial CSV, aggregate JSON, and one SVG per trial."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out / "trials.csv"
        write_trials_csv(report, spec, p)
        written.append(p)
    if "json" in formats:
        p = out / "aggregate.json"
        write_aggregate_json(report, p)
        written.append(p)
    if "svg" in formats:
        for label in sorted(report.trials):
            for r in report.trials[label]:
                p = out / f"trial_{label}_{r.seed}.svg"
                p.write_text(render_trial_svg(trial_to_json(r, spec)), encoding="utf-8")
                written.append(p)
    return written

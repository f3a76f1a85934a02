"""Strict JSON run-configuration parsing.

Unknown keys are fatal so a typo cannot silently misconfigure a benchmark.
The file is a single JSON object; every section and key is optional and
defaults to the shipped values (which follow the evaluation setup: dt 0.1 s,
v_max 1.75 m/s, collision radius 0.5 m, LiDAR 0.25 deg with +/-0.05 m noise,
offset 1 m, 8 history / 8 future steps, scan eps 0.5 m).
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import CrowdConfig, RunConfig, ScenarioSpec
from .geometry import EggParams
from .grouping import GroupingParams
from .planner import MpcParams
from .prediction import PredictionParams
from .sensing import LidarConfig


class ConfigError(ValueError):
    """Invalid or unknown configuration content; maps to exit code 2."""


def _check_keys(prefix: str, data: dict, allowed) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f'unknown config key "{prefix}{key}"')


def _tup(v):
    return tuple(v) if isinstance(v, (list, tuple)) else v


def _scenario(data: dict) -> ScenarioSpec:
    allowed = {
        "task", "mode", "perception", "method", "predictor", "area", "test_region",
        "robot_start", "robot_goal", "min_peds", "timeout", "goal_radius",
        "collision_radius", "n_groups", "group_size_range", "flow",
        "source", "dataset_path", "dataset_frame_dt",
    }
    _check_keys("scenario.", data, allowed)
    kwargs = {k: _tup(v) for k, v in data.items()}
    try:
        return ScenarioSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from exc


def _mpc(data: dict) -> MpcParams:
    allowed = {"horizon", "gamma", "lam", "dt", "v_max", "omega_max_deg", "n_samples", "drive_mode", "d0"}
    _check_keys("mpc.", data, allowed)
    kwargs = dict(data)
    if "omega_max_deg" in kwargs:
        kwargs["omega_max"] = float(np.deg2rad(kwargs.pop("omega_max_deg")))
    try:
        return MpcParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"mpc: {exc}") from exc


def _grouping(data: dict) -> GroupingParams:
    allowed = {"group_eps", "velocity_weight", "min_pts", "offset_d", "boundary_samples", "egg"}
    _check_keys("grouping.", data, allowed)
    kwargs = dict(data)
    egg = kwargs.pop("egg", {})
    _check_keys("grouping.egg.", egg, {"base_radius", "front_gain", "side_ratio", "rear_ratio"})
    try:
        kwargs["egg"] = EggParams(**egg)
        return GroupingParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"grouping: {exc}") from exc


def _prediction(data: dict) -> PredictionParams:
    allowed = {"history_steps", "future_steps", "association_radius"}
    _check_keys("prediction.", data, allowed)
    kwargs = {}
    if "history_steps" in data:
        kwargs["h"] = data["history_steps"]
    if "future_steps" in data:
        kwargs["f"] = data["future_steps"]
    if "association_radius" in data:
        kwargs["association_radius"] = data["association_radius"]
    try:
        return PredictionParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"prediction: {exc}") from exc


def _lidar(data: dict) -> LidarConfig:
    allowed = {"angular_resolution", "max_range", "noise_half_width", "pedestrian_radius", "fov"}
    _check_keys("lidar.", data, allowed)
    try:
        return LidarConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"lidar: {exc}") from exc


def _crowd(data: dict) -> CrowdConfig:
    allowed = {"radius", "max_speed", "time_horizon", "neighbor_dist", "scan_eps", "scan_max_extent", "gating_radius"}
    _check_keys("crowd.", data, allowed)
    try:
        return CrowdConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"crowd: {exc}") from exc


def parse_config_dict(raw: dict) -> RunConfig:
    allowed = {"scenario", "mpc", "grouping", "prediction", "lidar", "crowd", "output_dir", "seeds", "external_oracle"}
    _check_keys("", raw, allowed)
    for section in ("scenario", "mpc", "grouping", "prediction", "lidar", "crowd", "external_oracle"):
        if section in raw and not isinstance(raw[section], dict):
            raise ConfigError(f'config section "{section}" must be an object')

    seeds_raw = raw.get("seeds", [0])
    if isinstance(seeds_raw, dict):
        _check_keys("seeds.", seeds_raw, {"base", "count"})
        base = int(seeds_raw.get("base", 0))
        count = int(seeds_raw.get("count", 1))
        seeds = list(range(base, base + count))
    elif isinstance(seeds_raw, list):
        seeds = [int(s) for s in seeds_raw]
    else:
        raise ConfigError('config key "seeds" must be a list or {base, count}')
    if not seeds:
        raise ConfigError('config key "seeds" must not be empty')

    oracle = raw.get("external_oracle", {})
    _check_keys("external_oracle.", oracle, {"cmd", "timeout"})

    cfg = RunConfig(
        scenario=_scenario(raw.get("scenario", {})),
        mpc=_mpc(raw.get("mpc", {})),
        grouping=_grouping(raw.get("grouping", {})),
        prediction=_prediction(raw.get("prediction", {})),
        lidar=_lidar(raw.get("lidar", {})),
        crowd=_crowd(raw.get("crowd", {})),
        output_dir=str(raw.get("output_dir", "out")),
        seeds=seeds,
        external_oracle_cmd=list(oracle["cmd"]) if "cmd" in oracle else None,
        external_oracle_timeout=float(oracle.get("timeout", 0.05)),
    )
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    spec = cfg.scenario
    if spec.source == "dataset" and not spec.dataset_path:
        raise ConfigError('config key "scenario.dataset_path" is required when scenario.source is "dataset"')
    if spec.source not in ("synthetic", "dataset"):
        raise ConfigError('config key "scenario.source" must be "synthetic" or "dataset"')
    if spec.predictor == "external" and not cfg.external_oracle_cmd:
        raise ConfigError('config key "external_oracle.cmd" is required for the external predictor')
    if cfg.mpc.horizon != cfg.prediction.f:
        raise ConfigError(
            f"mpc.horizon ({cfg.mpc.horizon}) must equal prediction.future_steps ({cfg.prediction.f})"
        )


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config_dict(raw)


def config_to_dict(cfg: RunConfig) -> dict:
    """Serialize back to the file schema (round-trips through parse_config_dict)."""
    spec = cfg.scenario
    out = {
        "scenario": {
            "task": spec.task,
            "mode": spec.mode,
            "perception": spec.perception,
            "method": spec.method,
            "predictor": spec.predictor,
            "area": list(spec.area),
            "test_region": list(spec.test_region),
            "robot_start": list(spec.robot_start),
            "robot_goal": list(spec.robot_goal),
            "min_peds": spec.min_peds,
            "timeout": spec.timeout,
            "goal_radius": spec.goal_radius,
            "collision_radius": spec.collision_radius,
            "n_groups": spec.n_groups,
            "group_size_range": list(spec.group_size_range),
            "flow": list(spec.flow),
            "source": spec.source,
            "dataset_frame_dt": spec.dataset_frame_dt,
        },
        "mpc": {
            "horizon": cfg.mpc.horizon,
            "gamma": cfg.mpc.gamma,
            "lam": cfg.mpc.lam,
            "dt": cfg.mpc.dt,
            "v_max": cfg.mpc.v_max,
            "omega_max_deg": float(np.rad2deg(cfg.mpc.omega_max)),
            "n_samples": cfg.mpc.n_samples,
            "drive_mode": cfg.mpc.drive_mode,
            "d0": cfg.mpc.d0,
        },
        "grouping": {
            "group_eps": cfg.grouping.group_eps,
            "velocity_weight": cfg.grouping.velocity_weight,
            "min_pts": cfg.grouping.min_pts,
            "offset_d": cfg.grouping.offset_d,
            "boundary_samples": cfg.grouping.boundary_samples,
            "egg": {
                "base_radius": cfg.grouping.egg.base_radius,
                "front_gain": cfg.grouping.egg.front_gain,
                "side_ratio": cfg.grouping.egg.side_ratio,
                "rear_ratio": cfg.grouping.egg.rear_ratio,
            },
        },
        "prediction": {
            "history_steps": cfg.prediction.h,
            "future_steps": cfg.prediction.f,
            "association_radius": cfg.prediction.association_radius,
        },
        "lidar": {
            "angular_resolution": cfg.lidar.angular_resolution,
            "max_range": cfg.lidar.max_range,
            "noise_half_width": cfg.lidar.noise_half_width,
            "pedestrian_radius": cfg.lidar.pedestrian_radius,
            "fov": cfg.lidar.fov,
        },
        "crowd": {
            "radius": cfg.crowd.radius,
            "max_speed": cfg.crowd.max_speed,
            "time_horizon": cfg.crowd.time_horizon,
            "neighbor_dist": cfg.crowd.neighbor_dist,
            "scan_eps": cfg.crowd.scan_eps,
            "scan_max_extent": cfg.crowd.scan_max_extent,
            "gating_radius": cfg.crowd.gating_radius,
        },
        "output_dir": cfg.output_dir,
        "seeds": list(cfg.seeds),
    }
    if spec.dataset_path:
        out["scenario"]["dataset_path"] = spec.dataset_path
    if cfg.external_oracle_cmd:
        out["external_oracle"] = {"cmd": list(cfg.external_oracle_cmd), "timeout": cfg.external_oracle_timeout}
    return out


def with_method(cfg: RunConfig, method: str, predictor: str) -> RunConfig:
    """Config variant for one method label; ped/lidar force their perception."""
    perception = cfg.scenario.perception
    if method == "ped":
        perception = "perfect"
    elif method == "lidar":
        perception = "lidar"
    spec = replace(cfg.scenario, method=method, predictor=predictor, perception=perception)
    return replace(cfg, scenario=spec)

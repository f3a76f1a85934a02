"""Command-line entry point: run, bench, compare, render.

Output directory resolution: --out flag, then the EDGENAV_OUT environment
variable, then the config's output_dir. Exit codes: 0 success, 1 runtime
failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .bench import (
    METHODS,
    PREDICTORS,
    RunConfig,
    aggregate,
    format_table,
    generate_trials,
    read_trials_csv,
    render_trial_svg,
    run_trial,
    scene_for_seed,
    tost_equivalence,
    trial_to_json,
    write_aggregate_json,
    write_trials_csv,
)
from .config import ConfigError, parse_config, with_method
from .crowd import load_dataset

COMPARE_METRICS = ("min_dist", "path_length", "mean_step_time", "success")


def _parse_method_label(label: str) -> tuple[str, str]:
    for method in sorted(METHODS, key=len, reverse=True):
        for predictor in PREDICTORS:
            if label == f"{method}-{predictor}":
                return method, predictor
    raise ConfigError(
        f'unknown method "{label}"; expected <method>-<predictor> with '
        f"method in {METHODS} and predictor in {PREDICTORS}"
    )


def _scene_for(cfg: RunConfig, seed: int):
    spec = cfg.scenario
    if spec.source == "dataset":
        dataset = load_dataset(spec.dataset_path, frame_dt=spec.dataset_frame_dt)
        starts = generate_trials(dataset, spec)
        start = starts[seed % len(starts)] if starts else 0.0
        return dataset, start
    return scene_for_seed(spec, seed)


def _resolve_out(flag_value, cfg: RunConfig) -> Path:
    return Path(flag_value or os.environ.get("EDGENAV_OUT") or cfg.output_dir)


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    out_dir = _resolve_out(args.out, cfg)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    dataset, start = _scene_for(cfg, seed)
    spec = cfg.scenario
    print(f"trial: method={spec.label} task={spec.task} mode={spec.mode} "
          f"perception={spec.perception} seed={seed} start={start:.2f}s")

    result = run_trial(cfg, dataset, start, seed, measure_time=True, record_frames=True)
    for t, (x, y) in result.trajectory[:: max(1, int(round(1.0 / cfg.mpc.dt)))]:
        print(f"  t={t:6.2f}s robot=({x:6.2f},{y:6.2f})")
    print(f"outcome={result.outcome} min_dist={result.min_dist:.3f} "
          f"path_length={result.path_length:.2f} mean_step_time={result.mean_step_time:.4f}")

    out_dir.mkdir(parents=True, exist_ok=True)
    trial_file = out_dir / f"trial_{spec.label}_{seed}.json"
    trial_file.write_text(json.dumps(trial_to_json(result, spec), indent=2) + "\n", encoding="utf-8")
    svg_file = out_dir / f"trial_{spec.label}_{seed}.svg"
    svg_file.write_text(render_trial_svg(trial_to_json(result, spec)), encoding="utf-8")
    print(f"wrote {trial_file} and {svg_file}")
    return 0


def cmd_bench(args) -> int:
    cfg = parse_config(args.config)
    out_dir = _resolve_out(args.out, cfg)
    if args.methods:
        labels = [m.strip() for m in args.methods.split(",") if m.strip()]
    else:
        labels = [cfg.scenario.label]
    parsed = [_parse_method_label(label) for label in labels]
    seeds = cfg.seeds if args.trials is None else list(range(cfg.seeds[0], cfg.seeds[0] + args.trials))
    measure_time = bool(args.timed)
    parallel = bool(args.parallel) and not measure_time

    jobs = []
    for seed in seeds:
        dataset, start = _scene_for(cfg, seed)
        for (method, predictor), label in zip(parsed, labels):
            jobs.append((label, with_method(cfg, method, predictor), dataset, start, seed))

    def run_one(job):
        label, jcfg, dataset, start, seed = job
        return label, run_trial(jcfg, dataset, start, seed, measure_time=measure_time)

    results: dict[str, list] = {label: [] for label in labels}
    if parallel:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            for label, res in pool.map(run_one, jobs):
                results[label].append(res)
    else:
        for job in jobs:
            label, res = run_one(job)
            results[label].append(res)

    report = aggregate(results)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trials_csv(report, cfg.scenario, out_dir / "trials.csv")
    write_aggregate_json(report, out_dir / "aggregate.json")
    print(format_table(report))
    if not measure_time:
        print("note: Time column requires --timed (single-threaded); showing zeros")
    print(f"wrote {out_dir / 'trials.csv'} and {out_dir / 'aggregate.json'}")
    return 0


def cmd_compare(args) -> int:
    metric = args.metric
    if metric not in COMPARE_METRICS:
        raise ConfigError(f'unknown metric "{metric}"; choose from {sorted(COMPARE_METRICS)}')
    rows_a = read_trials_csv(args.report_a)
    rows_b = read_trials_csv(args.report_b)
    if not rows_a or not rows_b:
        raise ConfigError("reports must contain at least one trial row")
    seeds_a = sorted(int(r["seed"]) for r in rows_a)
    seeds_b = sorted(int(r["seed"]) for r in rows_b)
    if seeds_a != seeds_b:
        raise ConfigError("reports do not share trial seeds (paired scenes required)")

    def extract(rows):
        rows = sorted(rows, key=lambda r: int(r["seed"]))
        if metric == "success":
            return [1.0 if r["outcome"] == "reached" else 0.0 for r in rows]
        return [float(r[metric]) for r in rows]

    a = extract(rows_a)
    b = extract(rows_b)
    res = tost_equivalence(a, b, margin=args.margin, alpha=args.alpha)
    verdict = "equivalent" if res.equivalent else "not equivalent"
    print(
        f"metric={metric} margin=+/-{args.margin:g} n={len(a)} "
        f"p_lower={res.p_lower:.6f} p_upper={res.p_upper:.6f} p_tost={res.p_tost:.6f} -> {verdict}"
    )
    return 0


def cmd_render(args) -> int:
    path = Path(args.trial)
    try:
        trial = json.loads(path.read_text(encoding="utf-8"))
        svg = render_trial_svg(trial, frame=args.frame)
    except FileNotFoundError as exc:
        raise ConfigError(f"trial file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid trial file or frame: {exc}") from exc
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, encoding="utf-8")
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgenav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single trial with progress output")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("bench", help="run methods x trials and export reports")
    p_bench.add_argument("config")
    p_bench.add_argument("--methods", default=None, help="comma-separated labels, e.g. group-edge-linear,ped-linear")
    p_bench.add_argument("--trials", type=int, default=None)
    p_bench.add_argument("--parallel", action="store_true")
    p_bench.add_argument("--workers", type=int, default=4)
    p_bench.add_argument("--timed", action="store_true", help="measure per-step time (forces sequential)")
    p_bench.add_argument("--out", default=None)
    p_bench.set_defaults(func=cmd_bench)

    p_cmp = sub.add_parser("compare", help="TOST equivalence between two trial CSVs")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--metric", default="min_dist")
    p_cmp.add_argument("--margin", type=float, required=True)
    p_cmp.add_argument("--alpha", type=float, default=0.05)
    p_cmp.set_defaults(func=cmd_compare)

    p_render = sub.add_parser("render", help="render a trial JSON to SVG")
    p_render.add_argument("trial")
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--frame", type=int, default=None)
    p_render.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Small benchmark: edge pentagons vs entity baseline on paired scenes.

Runs 8 paired online trials per method on synthetic crossing crowds and
prints the headline table (SR / MinD / PL), a one-sided Welch test on the
safety margin, and a TOST equivalence check between the two group
representations. Expect the group methods to keep larger minimum distances
at the price of longer paths. (~1 minute.)
"""

from dataclasses import replace

import numpy as np

from edgenav.bench import (
    RunConfig,
    ScenarioSpec,
    aggregate,
    format_table,
    run_trial,
    scene_for_seed,
    tost_equivalence,
    welch_one_sided,
)

base = ScenarioSpec(task="cross", mode="online", perception="perfect", n_groups=4)
methods = {
    "group-edge-linear": ("group-edge", "linear"),
    "group-hull-linear": ("group-hull", "linear"),
    "ped-linear": ("ped", "linear"),
}

n_trials = 8
results = {label: [] for label in methods}
for seed in range(n_trials):
    dataset, start = scene_for_seed(base, seed)
    for label, (method, predictor) in methods.items():
        cfg = RunConfig(scenario=replace(base, method=method, predictor=predictor))
        results[label].append(run_trial(cfg, dataset, start, seed))
    print(f"scene {seed + 1}/{n_trials} done")

report = aggregate(results)
print()
print(format_table(report))

mind = {label: [r.min_dist for r in rs] for label, rs in results.items()}
p = welch_one_sided(mind["group-edge-linear"], mind["ped-linear"])
print(f"\nWelch one-sided p (edge MinD > entity MinD): {p:.4f}")

tost = tost_equivalence(mind["group-edge-linear"], mind["group-hull-linear"], margin=0.2)
print(f"TOST edge vs hull MinD, margin +/-0.2 m: p_tost={tost.p_tost:.4f} "
      f"({'equivalent' if tost.equivalent else 'small sample; run more trials'})")
print("\nfor the full protocol use: edgenav bench <config> --methods ... --trials N")

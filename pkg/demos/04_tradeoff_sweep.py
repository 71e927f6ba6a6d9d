"""The control-parameter trade-off: sweep V, watch cost fall and buffers grow.

Also shows the demand-rate effect on settling time. Run outputs land under
runs/demo-sweep/ in the per-slot CSV + metadata JSON contract that the
figures tool consumes, e.g.:

    offload-figures --figure cost-vs-v --inputs 'runs/demo-sweep/*' --out cost.png
"""

import collections

import numpy as np

from edgeoffload import run, sweep
from edgeoffload.engine import apply_axis
from edgeoffload.presets import make_reference_config

cfg = make_reference_config()
v_grid = [500.0, 1300.0, 2500.0, 5000.0]
seeds = [1, 2, 3]

print("sweeping V x seeds (12 runs, written to runs/demo-sweep/) ...")
rows = sweep(cfg, "control_v", v_grid, ["ldso"], seeds, out_dir="runs/demo-sweep")

cost = collections.defaultdict(list)
backlog = collections.defaultdict(list)
for r in rows:
    cost[r["value"]].append(r["avg_cost"])
    backlog[r["value"]].append(r["avg_sum_q"])

print(f"\n{'V':>6} {'avg cost':>10} {'avg backlog':>12}")
for v in v_grid:
    print(f"{v:>6.0f} {np.mean(cost[v]):>10.1f} {np.mean(backlog[v]):>12.0f}")
print("larger V buys cost at the price of buffered data")

print("\nsettling time vs demand rate (fixed V):")
for lam in (15.0, 25.0):
    slots = [run(apply_axis(cfg, "poisson_mean", lam), "ldso", seed=s)
             .summary["stabilization_slot"] for s in seeds]
    print(f"  mean requests/slot {lam:>4.0f}: backlog settles at slots {slots}")
print("heavier demand settles later (longer ramp to its working level)")

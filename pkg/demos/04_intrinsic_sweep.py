"""How capture rate and capture time respond to the two difficulty knobs.

Shrinking the capture radius and speeding up the evader both degrade every
heuristic: exactly the gap the curriculum is built to close. The same tables
come out of `pursuitsim sweep ... --out DIR` as plot-ready CSV.
"""
import dataclasses

import numpy as np

from pursuitsim import (
    AngelaniConfig,
    ApfConfig,
    IntrinsicParams,
    JanosovConfig,
    aggregate_metrics,
    load_scenario,
    run_scenario_batch,
)

task = load_scenario("empty")
policies = [("angelani", AngelaniConfig()), ("janosov", JanosovConfig()), ("apf", ApfConfig())]
episodes = 200

print("capture rate vs capture radius (evader speed 2.4):")
print(f"{'policy':>10} " + " ".join(f"{d:>6}" for d in (0.9, 0.6, 0.3, 0.12)))
for name, config in policies:
    rates = []
    for d_c in (0.9, 0.6, 0.3, 0.12):
        swept = dataclasses.replace(task, intrinsic=IntrinsicParams(d_c, 2.4))
        m = aggregate_metrics(run_scenario_batch(swept, config, episodes, seed_base=0))
        rates.append(m.capture_rate)
    print(f"{name:>10} " + " ".join(f"{r:6.3f}" for r in rates))

print("\ncapture timestep vs evader speed (capture radius 0.2):")
print(f"{'policy':>10} " + " ".join(f"{v:>6}" for v in (0.0, 1.2, 2.4)))
for name, config in policies:
    steps = []
    for v_e in (0.0, 1.2, 2.4):
        swept = dataclasses.replace(task, intrinsic=IntrinsicParams(0.2, v_e))
        m = aggregate_metrics(run_scenario_batch(swept, config, episodes, seed_base=0))
        steps.append(m.mean_capture_timestep)
    print(f"{name:>10} " + " ".join(f"{s:6.0f}" for s in steps))

"""Reproduce the shipped heuristic hyperparameters.

The package's JanosovConfig/ApfConfig defaults are the winning cells of this
search: feasibility-filtered random training layouts at an intermediate
difficulty (capture radius 0.3, evader speed 2.4; at the target difficulty
every heuristic scores ~0, so nothing separates the cells there).

Takes a minute or two on one core.
"""
import numpy as np

from pursuitsim import IntrinsicParams, RandomizationConfig, TaskParams, grid_search
from pursuitsim.feasibility import task_filter_sample

rng = np.random.default_rng(2024)
config = RandomizationConfig()
tasks = [
    TaskParams(intrinsic=IntrinsicParams(0.3, 2.4),
               external=task_filter_sample(rng, config), arena=config.arena)
    for _ in range(6)
]

janosov = grid_search(
    "janosov",
    {"prediction_horizon": [0.25, 0.5, 1.0], "inertia": [0.0, 0.25, 0.5],
     "peer_repulsion_gain": [0.0, 0.05], "wall_repulsion_gain": [0.0, 0.02]},
    tasks, episodes_per_cell=60, seed=7,
)
print("janosov winner:", janosov.best)

apf = grid_search(
    "apf",
    {"attract_gain": [1.0], "obstacle_repulsion_gain": [0.0, 0.02, 0.1],
     "obstacle_influence_radius": [0.3], "peer_repulsion_gain": [0.0, 0.05, 0.2],
     "peer_influence_radius": [0.4]},
    tasks, episodes_per_cell=60, seed=7,
)
print("apf winner:", apf.best)

print("\ntop apf cells by capture rate:")
for row in sorted(apf.rows, key=lambda r: (-r.capture_rate, r.capture_timestep_mean))[:5]:
    print(f"  rate={row.capture_rate:.3f} mean_ts={row.capture_timestep_mean:6.1f} {row.params}")

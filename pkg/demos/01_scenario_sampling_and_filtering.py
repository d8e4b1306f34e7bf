"""Domain-randomized scenario generation and the reachability filter.

Random layouts sometimes wall the evader off behind full-height obstacles.
The task filter rasterizes each layout to a drone-sized grid and keeps only
layouts where every drone can reach the evader.
"""
import numpy as np

from pursuitsim import RandomizationConfig, sample_external_params, task_filter_sample
from pursuitsim.feasibility import check_task_feasible

config = RandomizationConfig()  # 4 drones, 0-3 obstacles of height 0.6 or 1.2
rng = np.random.default_rng(7)

# Raw domain randomization: count how often it produces unsolvable layouts.
total, infeasible = 2000, 0
for _ in range(total):
    external = sample_external_params(rng, config)
    feasible, _ = check_task_feasible(external, config.arena)
    infeasible += not feasible
print(f"raw sampler: {infeasible}/{total} layouts infeasible "
      f"({100 * infeasible / total:.1f}%)")

# The filtered sampler rejects those automatically.
external = task_filter_sample(np.random.default_rng(11), config)
feasible, grid = check_task_feasible(external, config.arena)
print(f"\na filtered draw ({len(external.obstacles)} obstacles, feasible={feasible}):")
marks = {grid.cell_of(p[0], p[1]): "D" for p in external.drone_spawns}
marks[grid.cell_of(*external.evader_spawn[:2])] = "E"
print(grid.render(marks))
print("\n'#' blocked (outside arena or full-height obstacle), '.' free,")
print("'D' drone spawns, 'E' evader spawn. Obstacles of height 0.6 never")
print("block: everyone can fly over them.")

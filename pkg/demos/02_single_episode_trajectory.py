"""One full episode, step by step, with a top-down trajectory figure.

Four potential-field pursuers chase the scripted evader around the single
central tower. The trajectory log records every step; if matplotlib is
available the script draws the top-down view to tower1_episode.png.
"""
import numpy as np

from pursuitsim import ApfConfig, EpisodeOptions, HeuristicPolicy, load_scenario, run_episode
from pursuitsim.episode import materialize_episode_task

task = materialize_episode_task(load_scenario("tower1"), seed=4)
result = run_episode(task, HeuristicPolicy(ApfConfig()), seed=4,
                     options=EpisodeOptions(), log_trajectory=True)

print(f"captured: {result.captured} at step {result.capture_timestep}")
print(f"per-drone returns: {result.per_drone_return}")
print(f"trajectory records: {len(result.trajectory)}")

closest = min(
    min(np.linalg.norm(np.subtract(d["position"], rec["evader"]["position"]))
        for d in rec["drones"])
    for rec in result.trajectory
)
print(f"closest approach over the episode: {closest:.3f} m "
      f"(capture radius {task.intrinsic.capture_radius})")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the figure")
else:
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.add_patch(plt.Circle((0, 0), task.arena.radius, fill=False, color="k"))
    for o in task.external.obstacles:
        ax.add_patch(plt.Circle(o.center_xy, o.radius, color="gray",
                                alpha=0.9 if o.height >= task.arena.height else 0.4))
    for i in range(len(task.external.drone_spawns)):
        xs = [rec["drones"][i]["position"][0] for rec in result.trajectory]
        ys = [rec["drones"][i]["position"][1] for rec in result.trajectory]
        ax.plot(xs, ys, lw=1, label=f"drone {i}")
    ex = [rec["evader"]["position"][0] for rec in result.trajectory]
    ey = [rec["evader"]["position"][1] for rec in result.trajectory]
    ax.plot(ex, ey, "r--", lw=1.5, label="evader")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"tower1, capture at step {result.capture_timestep}")
    fig.savefig("tower1_episode.png", dpi=120)
    print("wrote tower1_episode.png")

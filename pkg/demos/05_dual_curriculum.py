"""The dual curriculum end to end with a scripted stand-in for a learner.

The schedule starts trivial (capture radius = arena radius, frozen evader),
ramps the evader speed to 2.4 in ten steps, then shrinks the capture radius
to 0.12 in ten more. A phase advances only when the trainer's policy captures
at least 98% of freshly sampled feasible scenarios; episodes the policy
fails feed an archive that later task selection revisits with probability 0.7.

A pure pursuer at 3 m/s beats the 2.4 m/s evader everywhere, so it walks all
21 phases; the same driver attaches to a real learner over the bridge.
"""
import numpy as np

from pursuitsim import (
    AngelaniConfig,
    CurriculumConfig,
    EpisodeOptions,
    HeuristicTrainer,
    QuadrotorParams,
    RandomizationConfig,
    run_dual_curriculum,
)

trainer = HeuristicTrainer(
    AngelaniConfig(),
    EpisodeOptions(quad=QuadrotorParams(max_speed=3.0, velocity_time_constant=0.0)),
)
config = CurriculumConfig(
    batch_size=16,
    eval_episodes=100,  # the full protocol uses 1000; 100 keeps the demo snappy
    max_iterations=42,
    randomization=RandomizationConfig(),
)
report = run_dual_curriculum(trainer, config, np.random.default_rng(0))

print(f"completed: {report.completed} after {len(report.records)} iterations")
print(f"{'iter':>4} {'phase':>5} {'d_c':>6} {'v_e':>5} {'train':>6} {'eval':>6} {'archive':>7}")
for r in report.records:
    print(
        f"{r['iteration']:>4} {r['phase']:>5} {r['capture_radius']:>6.3f} "
        f"{r['evader_speed']:>5.2f} {r['batch_capture_rate']:>6.2f} "
        f"{r['eval_capture_rate']:>6.2f} {r['archive_size']:>7}"
    )

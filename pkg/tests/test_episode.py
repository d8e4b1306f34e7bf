import dataclasses

import numpy as np
import pytest

from pursuitsim import (
    AngelaniConfig,
    ApfConfig,
    EpisodeOptions,
    HeuristicPolicy,
    JanosovConfig,
    Obstacle,
    QuadrotorParams,
    ZeroConfig,
    aggregate_metrics,
    check_capture,
    compute_reward,
    load_scenario,
    run_batch,
    run_episode,
    run_scenario_batch,
)
from pursuitsim.episode import EpisodeResult, materialize_episode_task

from helpers import make_task, make_world


# --- capture predicate ---------------------------------------------------------


def test_capture_within_radius():
    world = make_world((0.0, 0.0, 0.6), [(0.10, 0.0, 0.6)])
    assert check_capture(world, 0.12) is True


def test_capture_is_strict_at_the_boundary():
    world = make_world((0.0, 0.0, 0.6), [(0.12, 0.0, 0.6)])
    assert check_capture(world, 0.12) is False


def test_capture_with_arena_sized_radius():
    world = make_world((0.0, 0.0, 0.6), [(0.89, 0.0, 0.6)])
    assert check_capture(world, 0.9) is True


# --- reward algebra --------------------------------------------------------------


def test_capture_bonus_goes_to_every_drone():
    drones = [(0.05, 0.0, 0.6), (0.5, 0.0, 0.6), (-0.5, 0.0, 0.6)]
    world = make_world((0.0, 0.0, 0.6), drones)
    assert np.array_equal(compute_reward(world, 0.12, 0.1), [10.0, 10.0, 10.0])


def test_collision_penalty_hits_only_the_offender():
    obstacle = Obstacle(center_xy=(0.5, 0.0), radius=0.3, height=1.2)
    drones = [(-0.6, 0.0, 0.6), (0.15, 0.0, 0.6), (0.0, -0.6, 0.6)]
    world = make_world((0.0, 0.7, 0.6), drones, [obstacle])
    assert np.array_equal(compute_reward(world, 0.12, 0.1), [0.0, -1.0, 0.0])


def test_capture_and_collision_sum():
    obstacle = Obstacle(center_xy=(-0.55, 0.0), radius=0.3, height=1.2)
    drones = [(-0.2, 0.0, 0.6), (0.05, 0.0, 0.6), (0.5, 0.0, 0.6)]
    world = make_world((0.0, 0.0, 0.6), drones, [obstacle])
    assert np.array_equal(compute_reward(world, 0.12, 0.1), [9.0, 10.0, 10.0])


# --- episode loop ------------------------------------------------------------------


def closing_steps_oracle(start: float, speed_dt: float, capture_radius: float) -> int:
    """Independent 1-D kinematics: moves until the gap drops below the radius."""
    distance, moves = start, 0
    while not distance < capture_radius:
        distance -= speed_dt
        moves += 1
    return moves


def test_straight_line_capture_matches_kinematics_oracle():
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.12, evader_speed=0.0)
    options = EpisodeOptions(quad=QuadrotorParams(velocity_time_constant=0.0))
    result = run_batch([task], AngelaniConfig(), [0], options)[0]
    expected = closing_steps_oracle(0.5, 0.02, 0.12)
    assert expected == 19
    assert result.captured is True
    assert result.capture_timestep == expected
    assert result.capture_return == 10.0


def test_zero_commands_never_capture_a_fleeing_evader():
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.12, evader_speed=2.4)
    result = run_batch([task], ZeroConfig(), [0])[0]
    assert result.captured is False
    assert result.capture_timestep == 800
    assert result.capture_return == 0.0


def test_spawn_inside_capture_radius_captures_at_step_zero():
    task = make_task(
        [(0.08, 0.0, 0.6), (0.5, 0.3, 0.6)], (0.0, 0.0, 0.6),
        capture_radius=0.12, evader_speed=2.4,
    )
    result = run_batch([task], ZeroConfig(), [0])[0]
    assert result.captured is True
    assert result.capture_timestep == 0
    assert result.capture_return >= 10.0


def test_capture_can_be_disabled_as_terminator():
    task = make_task([(0.3, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.6, evader_speed=0.0)
    options = EpisodeOptions(capture_ends_episode=False, horizon=50)
    result = run_batch([task], AngelaniConfig(), [0], options)[0]
    assert result.captured is True
    assert result.capture_timestep == 0
    assert result.capture_return > 10.0  # keeps collecting capture bonuses


def test_policy_failures_abort_with_a_distinguishable_error():
    from pursuitsim import PolicyError
    from pursuitsim.dynamics import VelocityCommand

    task = make_task([(0.5, 0.0, 0.6), (0.0, 0.5, 0.6)], (0.0, 0.0, 0.6))

    class ShortHanded:
        def act(self, world):
            return [VelocityCommand((0.0, 0.0, 0.0))]  # one command for two drones

    with pytest.raises(PolicyError, match="expected 2"):
        run_episode(task, ShortHanded(), 0)

    class Broken:
        def act(self, world):
            raise ConnectionError("learner went away")

    with pytest.raises(ConnectionError):
        run_episode(task, Broken(), 0)


# --- metrics -----------------------------------------------------------------------


def _result(captured, step, task):
    return EpisodeResult(
        captured=captured,
        capture_timestep=step,
        per_drone_return=(10.0,) if captured else (0.0,),
        capture_return=10.0 if captured else 0.0,
        task=task,
        seed=0,
    )


def test_aggregate_metrics_mixed_batch():
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6))
    results = [_result(True, 200, task), _result(False, 800, task), _result(True, 400, task)]
    metrics = aggregate_metrics(results)
    assert metrics.capture_rate == pytest.approx(2 / 3)
    assert metrics.mean_capture_timestep == pytest.approx(1400 / 3)
    assert metrics.episode_count == 3


def test_aggregate_metrics_edges():
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6))
    instant = aggregate_metrics([_result(True, 0, task)] * 3)
    assert (instant.capture_rate, instant.mean_capture_timestep) == (1.0, 0.0)
    failed = aggregate_metrics([_result(False, 800, task)] * 3)
    assert (failed.capture_rate, failed.mean_capture_timestep) == (0.0, 800.0)
    with pytest.raises(ValueError, match="empty"):
        aggregate_metrics([])


# --- determinism and containment ------------------------------------------------------


def test_episode_is_bit_deterministic_including_trajectory():
    task = materialize_episode_task(load_scenario("tower1"), seed=99)
    policy = HeuristicPolicy(ApfConfig())
    a = run_episode(task, policy, 99, log_trajectory=True)
    b = run_episode(task, policy, 99, log_trajectory=True)
    assert a.to_dict() == b.to_dict()
    assert a.trajectory == b.trajectory


def test_agents_never_leave_the_arena():
    task = materialize_episode_task(load_scenario("tower3"), seed=5)
    result = run_episode(task, HeuristicPolicy(JanosovConfig()), 5, log_trajectory=True)
    for record in result.trajectory:
        for drone in record["drones"]:
            x, y, z = drone["position"]
            assert np.hypot(x, y) <= 0.9 + 1e-9
            assert 0.0 <= z <= 1.2
        x, y, z = record["evader"]["position"]
        assert np.hypot(x, y) <= 0.9 + 1e-9
        assert 0.0 <= z <= 1.2


def test_capture_rate_monotone_in_capture_radius():
    task = load_scenario("empty")
    rates = []
    for d_c in (0.9, 0.6, 0.3, 0.12):
        swept = dataclasses.replace(
            task, intrinsic=dataclasses.replace(task.intrinsic, capture_radius=d_c)
        )
        results = run_scenario_batch(swept, AngelaniConfig(), 60, seed_base=0)
        rates.append(aggregate_metrics(results).capture_rate)
    assert all(a >= b for a, b in zip(rates, rates[1:]))


def test_batched_and_sequential_runs_are_bit_identical():
    base = load_scenario("tower1")
    for config in (ZeroConfig(), AngelaniConfig(), JanosovConfig(), ApfConfig()):
        tasks = [materialize_episode_task(base, seed=s) for s in range(7, 12)]
        batch = run_batch(tasks, config, list(range(7, 12)))
        for task, seed, from_batch in zip(tasks, range(7, 12), batch):
            single = run_episode(task, HeuristicPolicy(config), seed)
            assert single.to_dict() == from_batch.to_dict()


def test_obstacle_slot_padding_does_not_change_results():
    base = load_scenario("tower1")
    tasks = [materialize_episode_task(base, seed=s) for s in range(3)]
    tight = run_batch(tasks, ApfConfig(), [0, 1, 2])
    padded = run_batch(tasks, ApfConfig(), [0, 1, 2], obstacle_slots=5)
    assert [r.to_dict() for r in tight] == [r.to_dict() for r in padded]


def test_capture_return_positive_iff_captured():
    task = load_scenario("empty")
    results = run_scenario_batch(task, ApfConfig(), 100, seed_base=21)
    for r in results:
        assert (r.capture_return > 0) == r.captured
        assert r.captured == (r.capture_timestep < 800)


def test_respawned_tasks_keep_layout_but_move_agents():
    base = load_scenario("tower3")
    a = materialize_episode_task(base, seed=1)
    b = materialize_episode_task(base, seed=2)
    assert a.external.obstacles == base.external.obstacles
    assert b.external.obstacles == base.external.obstacles
    assert a.external.drone_spawns != b.external.drone_spawns
    assert materialize_episode_task(base, 1, respawn=False) == base

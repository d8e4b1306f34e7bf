import json

import numpy as np
import pytest

from pursuitsim import (
    ArenaSpec,
    Obstacle,
    RandomizationConfig,
    ScenarioError,
    load_scenario,
    sample_external_params,
    save_scenario,
)
from pursuitsim.world import PRESET_NAMES, task_from_dict

from helpers import make_task


def test_sample_without_obstacles():
    config = RandomizationConfig(n_drones=3, n_obstacles_max=0)
    external = sample_external_params(np.random.default_rng(7), config)
    assert len(external.drone_spawns) == 3
    assert external.obstacles == ()
    for p in [*external.drone_spawns, external.evader_spawn]:
        assert np.hypot(p[0], p[1]) <= config.arena.radius
        assert 0 <= p[2] <= config.arena.height


def test_sampling_is_deterministic():
    config = RandomizationConfig()
    a = sample_external_params(np.random.default_rng(42), config)
    b = sample_external_params(np.random.default_rng(42), config)
    assert a == b  # bit-for-bit: plain float tuples compare exactly


def test_obstacle_count_uniform_over_range():
    config = RandomizationConfig(n_obstacles_max=3)
    rng = np.random.default_rng(0)
    counts = np.zeros(4)
    n = 10_000
    for _ in range(n):
        counts[len(sample_external_params(rng, config).obstacles)] += 1
    assert np.all(np.abs(counts / n - 0.25) < 0.02)


def test_sampled_params_always_satisfy_invariants():
    config = RandomizationConfig()
    rng = np.random.default_rng(123)
    for i in range(100_000):
        external = sample_external_params(rng, config)
        if i % 17 == 0:  # full validation is O(N^2); spot-check densely
            external.validate(config.arena)
        for p in [*external.drone_spawns, external.evader_spawn]:
            assert np.hypot(p[0], p[1]) <= config.arena.radius - config.spawn_margin + 1e-12
            assert not any(o.contains(p) for o in external.obstacles)
        assert len(external.obstacles) <= config.n_obstacles_max


def test_continuous_height_range_option():
    config = RandomizationConfig(
        n_obstacles_min=2, n_obstacles_max=2, obstacle_height_range=(0.4, 1.0)
    )
    rng = np.random.default_rng(15)
    heights = [
        o.height
        for _ in range(200)
        for o in sample_external_params(rng, config).obstacles
    ]
    assert all(0.4 <= h <= 1.0 for h in heights)
    assert len(set(heights)) > 100  # genuinely continuous, not a two-point set
    with pytest.raises(ScenarioError, match="obstacle_height_range"):
        RandomizationConfig(obstacle_height_range=(0.0, 2.0)).validate()


def test_over_constrained_config_raises():
    # 40 drones with 0.2 m separation inside a 0.35-radius spawn disk cannot fit.
    config = RandomizationConfig(n_drones=40, spawn_margin=0.55, max_attempts=50)
    with pytest.raises(Exception, match="attempt budget"):
        sample_external_params(np.random.default_rng(0), config)


def test_round_trip_is_exact():
    rng = np.random.default_rng(5)
    config = RandomizationConfig()
    for _ in range(50):
        task = make_task([(0.1, 0.2, 0.3), (0.4, -0.2, 0.9)], (-0.3, 0.1, 0.5))
        external = sample_external_params(rng, config)
        task = make_task(external.drone_spawns, external.evader_spawn, external.obstacles)
        assert load_scenario(save_scenario(task)) == task


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_load_and_validate(name):
    task = load_scenario(name)
    task.validate()
    assert task.arena == ArenaSpec(0.9, 1.2)


def test_preset_empty_has_no_obstacles():
    task = load_scenario("empty")
    assert task.external.obstacles == ()


def test_preset_tower1_single_central_full_height_tower():
    task = load_scenario("tower1")
    assert len(task.external.obstacles) == 1
    tower = task.external.obstacles[0]
    assert tower.height == 1.2
    assert np.hypot(*tower.center_xy) < 0.2


def test_obstacle_height_above_arena_rejected():
    doc = load_scenario("tower1").to_dict()
    doc["obstacles"][0]["height"] = 1.5
    with pytest.raises(ScenarioError, match=r"obstacles\[0\]\.height"):
        task_from_dict(doc)


def test_spawn_inside_obstacle_rejected():
    with pytest.raises(ScenarioError, match="inside obstacle"):
        make_task(
            [(0.0, 0.0, 0.3), (0.5, 0.5, 0.6)],
            (0.0, 0.6, 0.6),
            [Obstacle(center_xy=(0.0, 0.0), radius=0.3, height=1.2)],
        ).validate()


def test_spawn_separation_enforced():
    with pytest.raises(ScenarioError, match="separation"):
        make_task([(0.0, 0.0, 0.6), (0.05, 0.0, 0.6)], (0.5, 0.0, 0.6)).validate()


def test_spawn_outside_arena_rejected():
    with pytest.raises(ScenarioError, match="outside the arena"):
        make_task([(1.0, 0.0, 0.6)], (0.0, 0.5, 0.6)).validate()


def test_malformed_json_reports_document_error():
    with pytest.raises(ScenarioError, match="invalid JSON"):
        load_scenario("{not json")


def test_missing_field_reports_path():
    doc = load_scenario("empty").to_dict()
    del doc["evader"]
    with pytest.raises(ScenarioError, match="evader"):
        task_from_dict(json.loads(json.dumps(doc)))

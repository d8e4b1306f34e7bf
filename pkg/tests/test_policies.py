import numpy as np
import pytest

from pursuitsim import (
    AngelaniConfig,
    ApfConfig,
    JanosovConfig,
    Obstacle,
    ZeroConfig,
    angelani_action,
    apf_action,
    build_observation,
    grid_search,
    janosov_action,
    load_scenario,
    make_policy_config,
    observation_length,
)
from pursuitsim.policies import policy_command
from pursuitsim.world import WorldState

from helpers import make_task, make_world


# --- observation encoding ------------------------------------------------------


def test_observation_length_formula():
    assert observation_length(4, 3) == 44
    assert observation_length(1, 0) == 17
    world = WorldState.initial(load_scenario("empty"))
    assert len(build_observation(world, 0, 3)) == 44


def test_evader_relative_position_slot():
    world = make_world((0.4, 0.0, 0.5), [(0.1, 0.0, 0.5), (0.6, 0.3, 0.5)])
    obs = build_observation(world, 0, 3)
    assert obs[10:13] == pytest.approx([0.3, 0.0, 0.0])
    assert obs[0:3] == pytest.approx([0.1, 0.0, 0.5])
    assert obs[6:10] == pytest.approx([1.0, 0.0, 0.0, 0.0])
    # other drone relative position
    assert obs[16:19] == pytest.approx([0.5, 0.3, 0.0])


def test_absent_obstacle_slots_are_zero_with_flag_zero():
    obstacle = Obstacle(center_xy=(0.2, -0.1), radius=0.3, height=0.6)
    world = make_world((0.4, 0.0, 0.5), [(0.1, 0.0, 0.5)], [obstacle])
    obs = build_observation(world, 0, 3)
    base = 10 + 6 + 0 + 1  # N=1: no peer block
    slot0 = obs[base : base + 6]
    assert slot0 == pytest.approx([0.1, -0.1, -0.5, 0.6, 0.3, 1.0])
    assert np.array_equal(obs[base + 6 : base + 18], np.zeros(12))


def test_normalized_time_advances():
    world = make_world((0.4, 0.0, 0.5), [(0.1, 0.0, 0.5)])
    world.step_index = 400
    obs = build_observation(world, 0, 0, horizon=800)
    assert obs[-1] == pytest.approx(0.5)


# --- pure pursuit ----------------------------------------------------------------


def test_pursuit_heads_straight_at_evader():
    world = make_world((0.5, 0.0, 0.5), [(0.0, 0.0, 0.5)])
    assert angelani_action(world, 0, 1.0) == pytest.approx([1.0, 0.0, 0.0])


def test_pursuit_zero_when_coincident():
    world = make_world((0.2, 0.0, 0.5), [(0.2, 0.0, 0.5)])
    assert np.array_equal(angelani_action(world, 0, 1.0), [0.0, 0.0, 0.0])


def test_pursuit_descends_to_lower_evader():
    world = make_world((0.2, 0.0, 0.2), [(0.2, 0.0, 0.9)])
    assert angelani_action(world, 0, 1.0)[2] < 0


# --- prediction-based chase --------------------------------------------------------


def test_zero_horizon_reduces_to_pure_pursuit():
    config = JanosovConfig(
        prediction_horizon=0.0, inertia=0.0, peer_repulsion_gain=0.0, wall_repulsion_gain=0.0
    )
    world = make_world((0.5, 0.2, 0.5), [(0.0, 0.0, 0.5), (-0.3, 0.1, 0.4)])
    for i in range(2):
        assert np.array_equal(
            janosov_action(world, i, config, 1.0), angelani_action(world, i, 1.0)
        )


def test_chase_leads_a_moving_evader():
    config = JanosovConfig(
        prediction_horizon=0.5, inertia=0.0, peer_repulsion_gain=0.0, wall_repulsion_gain=0.0
    )
    world = make_world((0.2, 0.0, 0.5), [(-0.3, 0.0, 0.5)])
    world.evader.velocity = np.array([0.0, 2.0, 0.0])  # evader moving +y
    cmd = janosov_action(world, 0, config, 1.0)
    assert cmd[1] > 0  # aims ahead of the current position


def test_coincident_peers_repel_in_opposite_directions():
    config = JanosovConfig(
        prediction_horizon=0.0, inertia=0.0, peer_repulsion_gain=1.0, wall_repulsion_gain=0.0
    )
    world = make_world((0.0, 0.5, 0.5), [(-0.1, -0.3, 0.5), (0.1, -0.3, 0.5)])
    cmd0 = janosov_action(world, 0, config, 1.0)
    cmd1 = janosov_action(world, 1, config, 1.0)
    # the peer-repulsion components along x oppose each other symmetrically
    assert cmd0[0] < 0 < cmd1[0]
    assert cmd0[0] == pytest.approx(-cmd1[0], abs=1e-12)


def test_command_delay_holds_commands_back():
    from pursuitsim import run_batch, run_episode
    from pursuitsim.policies import HeuristicPolicy

    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.12, evader_speed=0.0)
    base = JanosovConfig(prediction_horizon=0.0, inertia=0.0,
                         peer_repulsion_gain=0.0, wall_repulsion_gain=0.0)
    delayed = JanosovConfig(prediction_horizon=0.0, inertia=0.0,
                            peer_repulsion_gain=0.0, wall_repulsion_gain=0.0,
                            command_delay=3)
    plain = run_batch([task], base, [0])[0]
    held = run_batch([task], delayed, [0])[0]
    # three zero-command warm-up steps postpone an otherwise identical chase
    assert held.capture_timestep == plain.capture_timestep + 3
    # the sequential wrapper applies the same delay line
    sequential = run_episode(task, HeuristicPolicy(delayed), 0)
    assert sequential.to_dict() == held.to_dict()
    with pytest.raises(ValueError, match="command_delay"):
        JanosovConfig(command_delay=-1)


def test_inertia_blends_with_current_velocity():
    config = JanosovConfig(
        prediction_horizon=0.0, inertia=1.0, peer_repulsion_gain=0.0, wall_repulsion_gain=0.0
    )
    world = make_world((0.5, 0.0, 0.5), [(0.0, 0.0, 0.5)])
    world.drones[0].velocity = np.array([0.0, 0.4, 0.0])
    cmd = janosov_action(world, 0, config, 1.0)
    assert cmd == pytest.approx([0.0, 0.4, 0.0])


# --- potential-field pursuit ---------------------------------------------------------


def test_apf_without_neighbors_matches_pure_pursuit():
    config = ApfConfig()
    world = make_world((0.5, 0.1, 0.5), [(-0.2, 0.0, 0.5)])
    assert apf_action(world, 0, config, 1.0) == pytest.approx(
        angelani_action(world, 0, 1.0), abs=1e-12
    )


def test_apf_deflects_around_blocking_obstacle():
    # Obstacle between drone and evader, drone a hair off the axis: the
    # repulsion must bend the command away from the straight pursuit line.
    obstacle = Obstacle(center_xy=(0.0, 0.0), radius=0.3, height=1.2)
    config = ApfConfig(obstacle_repulsion_gain=2.0, obstacle_influence_radius=0.5)
    world = make_world((0.6, 0.0, 0.5), [(-0.5, 0.02, 0.5)], [obstacle])
    cmd = apf_action(world, 0, config, 1.0)
    pursuit = angelani_action(world, 0, 1.0)
    cosine = float(np.dot(cmd, pursuit))
    assert cosine < 1.0 - 1e-6  # deflection angle > 0
    assert cmd[1] > abs(pursuit[1])  # pushed sideways off the chase line


def test_apf_obstacle_beyond_influence_contributes_nothing():
    obstacle = Obstacle(center_xy=(0.0, 0.5), radius=0.1, height=1.2)
    config = ApfConfig(obstacle_repulsion_gain=5.0, obstacle_influence_radius=0.2)
    world = make_world((0.6, -0.5, 0.5), [(-0.5, -0.5, 0.5)], [obstacle])
    with_obstacle = apf_action(world, 0, config, 1.0)
    bare = make_world((0.6, -0.5, 0.5), [(-0.5, -0.5, 0.5)])
    assert np.array_equal(with_obstacle, apf_action(bare, 0, config, 1.0))


# --- shared-policy properties ---------------------------------------------------------


@pytest.mark.parametrize(
    "config",
    [ZeroConfig(), AngelaniConfig(), JanosovConfig(), ApfConfig()],
    ids=["zero", "angelani", "janosov", "apf"],
)
def test_commands_never_exceed_max_speed(config):
    rng = np.random.default_rng(13)
    for _ in range(200):
        drones = [tuple(rng.uniform(-0.5, 0.5, 2)) + (rng.uniform(0.1, 1.1),) for _ in range(4)]
        world = make_world(tuple(rng.uniform(-0.5, 0.5, 2)) + (0.6,), drones)
        for i in range(4):
            drone_cmd = policy_command(config, world, i, 1.0)
            assert np.linalg.norm(drone_cmd) <= 1.0 + 1e-12


@pytest.mark.parametrize(
    "config", [AngelaniConfig(), JanosovConfig(), ApfConfig()],
    ids=["angelani", "janosov", "apf"],
)
def test_policy_is_permutation_equivariant(config):
    drones = [(-0.2, -0.3, 0.5), (0.3, -0.4, 0.7), (0.1, 0.2, 0.3)]
    world = make_world((0.0, 0.5, 0.6), drones)
    swapped = make_world((0.0, 0.5, 0.6), [drones[2], drones[1], drones[0]])
    assert np.array_equal(
        policy_command(config, world, 0, 1.0), policy_command(config, swapped, 2, 1.0)
    )
    assert np.array_equal(
        policy_command(config, world, 1, 1.0), policy_command(config, swapped, 1, 1.0)
    )


# --- grid search ------------------------------------------------------------------------


def test_grid_search_single_cell_returns_it():
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.6, evader_speed=0.0)
    result = grid_search(
        "apf", {"attract_gain": [1.0]}, [task], episodes_per_cell=4, seed=0, respawn=False
    )
    assert result.best == ApfConfig(attract_gain=1.0)
    assert len(result.rows) == 1
    assert result.rows[0].capture_rate == 1.0


def test_grid_search_prefers_the_winning_cell():
    # inertia=1.0 from rest never moves; inertia=0.0 is pure pursuit
    task = make_task([(0.5, 0.0, 0.6)], (0.0, 0.0, 0.6), capture_radius=0.12, evader_speed=0.0)
    result = grid_search(
        "janosov",
        {"inertia": [1.0, 0.0], "prediction_horizon": [0.0]},
        [task],
        episodes_per_cell=4,
        seed=0,
        respawn=False,
    )
    assert result.best.inertia == 0.0
    rates = {row.params["inertia"]: row.capture_rate for row in result.rows}
    assert rates[0.0] > rates[1.0]


def test_grid_search_is_deterministic():
    task = load_scenario("tower3")
    grid = {"attract_gain": [0.5, 1.0], "peer_repulsion_gain": [0.0, 0.1]}
    a = grid_search("apf", grid, [task], episodes_per_cell=6, seed=11)
    b = grid_search("apf", grid, [task], episodes_per_cell=6, seed=11)
    assert a.best == b.best
    assert [(r.params, r.capture_rate, r.capture_timestep_mean) for r in a.rows] == [
        (r.params, r.capture_rate, r.capture_timestep_mean) for r in b.rows
    ]


def test_grid_search_rejects_empty_and_unknown():
    task = load_scenario("empty")
    with pytest.raises(ValueError, match="empty grid"):
        grid_search("apf", {"attract_gain": []}, [task], 2, seed=0)
    with pytest.raises(ValueError, match="not accepted"):
        grid_search("apf", {"bogus": [1.0]}, [task], 2, seed=0)
    with pytest.raises(ValueError, match="unknown policy family"):
        make_policy_config("nonexistent")

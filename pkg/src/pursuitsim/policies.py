"""Pursuit policies: observation encoding, heuristic baselines, grid search.

The three heuristics command world-frame velocities executed by the
velocity-tracking model:

* ``angelani`` - pure pursuit straight at the evader.
* ``janosov`` - greedy chase of the evader's predicted position with inertia,
  teammate repulsion, and wall repulsion.
* ``apf`` - artificial potential field: attraction to the evader plus
  inverse-square repulsion from obstacles and teammates inside influence radii.

The published descriptions of the latter two leave the force algebra open;
the constructions here are reconstructions and their gains are exposed for
grid search. All heuristics are shared across drones: permuting drone indices
permutes the commands identically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from typing import Mapping, Sequence, Union

import numpy as np

from .geometry import (
    boundary_inward_terms,
    clamp_speed,
    inverse_square_term,
    norm3,
    unit3,
    vector_from_cylinder_surface,
)
from .world import ArenaSpec, TaskParams, WorldState


# --- policy configurations ----------------------------------------------------


@dataclass(frozen=True)
class ZeroConfig:
    """Always commands zero velocity (control baseline)."""


@dataclass(frozen=True)
class AngelaniConfig:
    """Pure pursuit toward the evader; no hyperparameters."""


@dataclass(frozen=True)
class JanosovConfig:
    """Greedy prediction-based chase with inertia and repulsion terms.

    Defaults are the best cell of a grid search on randomized training
    scenarios (see demos/03_gridsearch_defaults.py to reproduce).
    ``command_delay`` holds each command back that many control steps (zero
    commands during warm-up) - a deterministic stand-in for reaction latency,
    off by default. The published stochastic noise term is omitted entirely:
    the engine is deterministic by contract.
    """

    prediction_horizon: float = 0.25
    inertia: float = 0.25
    peer_repulsion_gain: float = 0.05
    wall_repulsion_gain: float = 0.02
    command_delay: int = 0

    def __post_init__(self) -> None:
        if self.prediction_horizon < 0:
            raise ValueError("prediction_horizon must be >= 0")
        if not 0.0 <= self.inertia <= 1.0:
            raise ValueError("inertia must be in [0, 1]")
        if self.peer_repulsion_gain < 0 or self.wall_repulsion_gain < 0:
            raise ValueError("gains must be >= 0")
        if self.command_delay < 0:
            raise ValueError("command_delay must be >= 0")


@dataclass(frozen=True)
class ApfConfig:
    """Attractive/repulsive potential-field pursuit.

    Defaults are the best cell of a grid search on randomized training
    scenarios (see demos/03_gridsearch_defaults.py to reproduce); the peer
    repulsion spreads the team into a loose encirclement.
    """

    attract_gain: float = 1.0
    obstacle_repulsion_gain: float = 0.1
    obstacle_influence_radius: float = 0.3
    peer_repulsion_gain: float = 0.2
    peer_influence_radius: float = 0.4

    def __post_init__(self) -> None:
        if min(self.attract_gain, self.obstacle_repulsion_gain, self.peer_repulsion_gain) < 0:
            raise ValueError("gains must be >= 0")
        if self.obstacle_influence_radius <= 0 or self.peer_influence_radius <= 0:
            raise ValueError("influence radii must be > 0")


@dataclass(frozen=True)
class ExternalConfig:
    """Policy served by an external process over the bridge protocol."""

    endpoint: str


PolicyConfig = Union[ZeroConfig, AngelaniConfig, JanosovConfig, ApfConfig, ExternalConfig]

POLICY_FAMILIES: Mapping[str, type] = {
    "zero": ZeroConfig,
    "angelani": AngelaniConfig,
    "janosov": JanosovConfig,
    "apf": ApfConfig,
}


def make_policy_config(family: str, **params) -> PolicyConfig:
    try:
        cls = POLICY_FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"unknown policy family {family!r}; expected one of {sorted(POLICY_FAMILIES)}"
        ) from None
    return cls(**params)


# --- observation encoding -----------------------------------------------------


def observation_length(n_drones: int, n_obstacle_slots: int) -> int:
    """Flat observation length: 10 self + 6 evader + 3(N-1) peers + 1 time + 6 per slot."""
    return 10 + 6 + 3 * (n_drones - 1) + 1 + 6 * n_obstacle_slots


def build_observation(
    world: WorldState, drone_index: int, n_obstacle_slots: int, horizon: int = 800
) -> np.ndarray:
    """Flat per-drone observation vector.

    Layout (all relative quantities are other-minus-self):
      [0:3]   self position
      [3:6]   self velocity
      [6:10]  self orientation quaternion (w, x, y, z)
      [10:13] evader position relative to self
      [13:16] evader velocity relative to self
      [16:16+3(N-1)] other drones' positions relative to self, by rising index
      [next]  normalized time step_index / horizon
      then ``n_obstacle_slots`` slots of [relative position of the base-center
      (3), height, radius, validity flag]; absent slots are all-zero.
    """
    me = world.drones[drone_index]
    parts: list[np.ndarray] = [
        me.position,
        me.velocity,
        me.orientation,
        world.evader.position - me.position,
        world.evader.velocity - me.velocity,
    ]
    for j, other in enumerate(world.drones):
        if j != drone_index:
            parts.append(other.position - me.position)
    parts.append(np.array([world.step_index / horizon]))
    obstacles = world.task.external.obstacles
    for slot in range(n_obstacle_slots):
        if slot < len(obstacles):
            o = obstacles[slot]
            base = np.array([o.center_xy[0], o.center_xy[1], 0.0])
            parts.append(base - me.position)
            parts.append(np.array([o.height, o.radius, 1.0]))
        else:
            parts.append(np.zeros(6))
    return np.concatenate(parts)


def build_observation_matrix(
    world: WorldState, n_obstacle_slots: int, horizon: int = 800
) -> np.ndarray:
    """Observations for every drone, shape (N, observation_length)."""
    return np.stack(
        [build_observation(world, i, n_obstacle_slots, horizon) for i in range(world.n_drones)]
    )


# --- batched heuristic kernels -------------------------------------------------
#
# Shapes: drone_pos/drone_vel (B, N, 3); evader_pos/evader_vel (B, 3);
# obstacle arrays (B, K) with mask 1.0/0.0. Commands returned as (B, N, 3).


def angelani_arrays(drone_pos: np.ndarray, evader_pos: np.ndarray, max_speed: float) -> np.ndarray:
    offset = evader_pos[..., None, :] - drone_pos
    return unit3(offset) * max_speed


def _peer_repulsion(drone_pos: np.ndarray) -> np.ndarray:
    """Sum over teammates of (self - peer) / ||self - peer||^2, shape (B, N, 3)."""
    diff = drone_pos[..., :, None, :] - drone_pos[..., None, :, :]  # (B, N, N, 3)
    terms = inverse_square_term(diff)
    n = drone_pos.shape[-2]
    eye = np.eye(n, dtype=bool)
    terms = np.where(eye[..., None], 0.0, terms)
    return np.sum(terms, axis=-2)


def janosov_arrays(
    drone_pos: np.ndarray,
    drone_vel: np.ndarray,
    evader_pos: np.ndarray,
    evader_vel: np.ndarray,
    config: JanosovConfig,
    max_speed: float,
    arena: ArenaSpec,
) -> np.ndarray:
    offset = evader_pos[..., None, :] - drone_pos
    dist = norm3(offset)
    t_pred = np.minimum(dist / max_speed, config.prediction_horizon)
    predicted = evader_pos[..., None, :] + evader_vel[..., None, :] * t_pred[..., None]
    chase = unit3(predicted - drone_pos) * max_speed

    raw = chase
    if config.peer_repulsion_gain > 0:
        raw = raw + config.peer_repulsion_gain * _peer_repulsion(drone_pos)
    if config.wall_repulsion_gain > 0:
        walls = boundary_inward_terms(drone_pos, arena.radius, arena.height)
        raw = raw + config.wall_repulsion_gain * np.sum(walls, axis=-2)

    blended = config.inertia * drone_vel + (1.0 - config.inertia) * raw
    return clamp_speed(blended, max_speed)


def apf_arrays(
    drone_pos: np.ndarray,
    evader_pos: np.ndarray,
    obs_cx: np.ndarray,
    obs_cy: np.ndarray,
    obs_radius: np.ndarray,
    obs_height: np.ndarray,
    obs_mask: np.ndarray,
    config: ApfConfig,
    max_speed: float,
) -> np.ndarray:
    force = config.attract_gain * unit3(evader_pos[..., None, :] - drone_pos)

    if config.obstacle_repulsion_gain > 0 and obs_cx.shape[-1] > 0:
        surf = vector_from_cylinder_surface(
            drone_pos[..., :, None, :],  # (B, N, 1, 3) against (B, 1, K)
            obs_cx[..., None, :],
            obs_cy[..., None, :],
            obs_radius[..., None, :],
            obs_height[..., None, :],
        )  # (B, N, K, 3)
        dist = norm3(surf)
        live = (obs_mask[..., None, :] > 0.0) & (dist < config.obstacle_influence_radius)
        terms = np.where(live[..., None], inverse_square_term(surf), 0.0)
        force = force + config.obstacle_repulsion_gain * np.sum(terms, axis=-2)

    if config.peer_repulsion_gain > 0:
        diff = drone_pos[..., :, None, :] - drone_pos[..., None, :, :]
        dist = norm3(diff)
        n = drone_pos.shape[-2]
        live = ~np.eye(n, dtype=bool) & (dist < config.peer_influence_radius)
        terms = np.where(live[..., None], inverse_square_term(diff), 0.0)
        force = force + config.peer_repulsion_gain * np.sum(terms, axis=-2)

    return unit3(force) * max_speed


def heuristic_commands(
    config: PolicyConfig,
    drone_pos: np.ndarray,
    drone_vel: np.ndarray,
    evader_pos: np.ndarray,
    evader_vel: np.ndarray,
    obs_cx: np.ndarray,
    obs_cy: np.ndarray,
    obs_radius: np.ndarray,
    obs_height: np.ndarray,
    obs_mask: np.ndarray,
    max_speed: float,
    arena: ArenaSpec,
) -> np.ndarray:
    """Velocity commands (B, N, 3) for any built-in heuristic config."""
    if isinstance(config, ZeroConfig):
        return np.zeros_like(drone_pos)
    if isinstance(config, AngelaniConfig):
        return angelani_arrays(drone_pos, evader_pos, max_speed)
    if isinstance(config, JanosovConfig):
        return janosov_arrays(
            drone_pos, drone_vel, evader_pos, evader_vel, config, max_speed, arena
        )
    if isinstance(config, ApfConfig):
        return apf_arrays(
            drone_pos, evader_pos, obs_cx, obs_cy, obs_radius, obs_height, obs_mask,
            config, max_speed,
        )
    if isinstance(config, ExternalConfig):
        raise TypeError(
            "ExternalConfig policies run over the bridge: start `pursuitsim serve` "
            f"at {config.endpoint!r} and connect the learner there"
        )
    raise TypeError(f"{type(config).__name__} cannot run as an in-process heuristic")


# --- single-drone API ----------------------------------------------------------


def _world_arrays(world: WorldState):
    drone_pos = np.stack([d.position for d in world.drones])[None]
    drone_vel = np.stack([d.velocity for d in world.drones])[None]
    obstacles = world.task.external.obstacles
    k = len(obstacles)
    cx = np.array([o.center_xy[0] for o in obstacles]).reshape(1, k)
    cy = np.array([o.center_xy[1] for o in obstacles]).reshape(1, k)
    r = np.array([o.radius for o in obstacles]).reshape(1, k)
    h = np.array([o.height for o in obstacles]).reshape(1, k)
    mask = np.ones((1, k))
    return drone_pos, drone_vel, world.evader.position[None], world.evader.velocity[None], cx, cy, r, h, mask


def policy_command(
    config: PolicyConfig, world: WorldState, drone_index: int, max_speed: float
) -> np.ndarray:
    """Velocity command for one drone under any heuristic config."""
    dp, dv, ep, ev, cx, cy, r, h, mask = _world_arrays(world)
    cmds = heuristic_commands(
        config, dp, dv, ep, ev, cx, cy, r, h, mask, max_speed, world.task.arena
    )
    return cmds[0, drone_index]


def angelani_action(world: WorldState, drone_index: int, max_speed: float) -> np.ndarray:
    return policy_command(AngelaniConfig(), world, drone_index, max_speed)


def janosov_action(
    world: WorldState, drone_index: int, config: JanosovConfig, max_speed: float
) -> np.ndarray:
    return policy_command(config, world, drone_index, max_speed)


def apf_action(
    world: WorldState, drone_index: int, config: ApfConfig, max_speed: float
) -> np.ndarray:
    return policy_command(config, world, drone_index, max_speed)


class HeuristicPolicy:
    """Joint-policy wrapper around a heuristic config for the episode driver.

    Commands are computed by the same vectorized kernels the batch runner
    uses, so episodes driven through this wrapper match batched runs
    bit-for-bit.
    """

    def __init__(self, config: PolicyConfig, quad=None):
        from .dynamics import QuadrotorParams

        self.config = config
        self.quad = quad or QuadrotorParams()
        self._pending: list = []

    def begin_episode(self, task: TaskParams, seed: int) -> None:
        self._pending = []

    def act(self, world: WorldState):
        from .dynamics import VelocityCommand

        dp, dv, ep, ev, cx, cy, r, h, mask = _world_arrays(world)
        cmds = heuristic_commands(
            self.config, dp, dv, ep, ev, cx, cy, r, h, mask,
            self.quad.max_speed, world.task.arena,
        )[0]
        delay = getattr(self.config, "command_delay", 0)
        if delay > 0:
            self._pending.append(cmds)
            if len(self._pending) > delay:
                cmds = self._pending.pop(0)
            else:
                cmds = np.zeros_like(cmds)
        return [
            VelocityCommand((float(c[0]), float(c[1]), float(c[2]))) for c in cmds
        ]

    def end_episode(self, result) -> None:
        pass


# --- hyperparameter grid search -------------------------------------------------


@dataclass
class GridSearchRow:
    params: dict
    capture_rate: float
    capture_timestep_mean: float


@dataclass
class GridSearchResult:
    best: PolicyConfig
    rows: list[GridSearchRow] = field(default_factory=list)


def grid_search(
    family: str,
    grid: Mapping[str, Sequence],
    tasks: Sequence[TaskParams],
    episodes_per_cell: int,
    seed: int,
    options=None,
    respawn: bool = True,
) -> GridSearchResult:
    """Exhaustive search over a hyperparameter grid.

    Each cell is scored by capture rate over ``episodes_per_cell`` episodes
    (tasks cycled round-robin, per-episode seeds derived from ``seed`` so every
    cell sees identical scenarios). Ties break toward the lower mean capture
    timestep, then toward earlier grid order.
    """
    from .episode import EpisodeOptions, aggregate_metrics, run_scenario_batch

    if not grid and family not in POLICY_FAMILIES:
        raise ValueError("empty grid")
    keys = list(grid.keys())
    cells = list(itertools.product(*(grid[k] for k in keys)))
    if not cells:
        raise ValueError("empty grid")
    if not tasks:
        raise ValueError("empty task set")
    options = options or EpisodeOptions()

    valid_fields = {f.name for f in fields(POLICY_FAMILIES[family])}
    unknown = set(keys) - valid_fields
    if unknown:
        raise ValueError(f"grid parameters {sorted(unknown)} not accepted by {family!r}")

    rows: list[GridSearchRow] = []
    best_idx = 0
    best_key: tuple[float, float] | None = None
    configs = []
    for cell in cells:
        params = dict(zip(keys, cell))
        config = make_policy_config(family, **params)
        configs.append(config)
        results = []
        for t_idx, task in enumerate(tasks):
            n = episodes_per_cell // len(tasks) + (
                1 if t_idx < episodes_per_cell % len(tasks) else 0
            )
            if n == 0:
                continue
            results.extend(
                run_scenario_batch(
                    task, config, n, seed_base=seed + t_idx, options=options, respawn=respawn
                )
            )
        metrics = aggregate_metrics(results)
        rows.append(
            GridSearchRow(
                params=params,
                capture_rate=metrics.capture_rate,
                capture_timestep_mean=metrics.mean_capture_timestep,
            )
        )
        key = (-metrics.capture_rate, metrics.mean_capture_timestep)
        if best_key is None or key < best_key:
            best_key = key
            best_idx = len(rows) - 1
    return GridSearchResult(best=configs[best_idx], rows=rows)

"""Episode loop: stepping all agents, rewards, capture/termination, metrics.

The engine steps a whole batch of independent episodes as stacked numpy
arrays. Every operation is elementwise per episode row (reductions only run
over fixed-length agent/obstacle axes), so results are bit-identical no
matter how episodes are batched or chunked across workers. ``run_episode``
drives a single episode through the same kernels with a batch of one, which
is what makes in-process and bridge-driven runs exactly comparable.

Step order within one tick: policy commands -> drone dynamics -> evader
potential-field move -> rewards -> capture check / termination.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Protocol, Sequence

import numpy as np

from . import feasibility
from .dynamics import (
    DroneCommand,
    QuadrotorParams,
    ThrustRateCommand,
    VelocityCommand,
    step_quadrotor_arrays,
    step_velocity_arrays,
)
from .evader import evader_force_arrays, evader_velocity_arrays
from .geometry import clamp_inside_cylinder, distance_to_cylinder_solid, norm3, unit3
from .policies import PolicyConfig, heuristic_commands
from .world import (
    DRONE_SIZE,
    ArenaSpec,
    DroneState,
    EvaderState,
    RandomizationConfig,
    TaskParams,
    WorldState,
    resample_spawns,
)

#: How far inside the boundary the evader is kept so boundary distances stay
#: positive for the potential field.
ARENA_INSET = 1e-6


class PolicyError(RuntimeError):
    """A policy failed to produce usable commands; the episode is aborted."""


@dataclass(frozen=True)
class EpisodeOptions:
    """Episode-level knobs shared by single and batched runs."""

    horizon: int = 800
    collision_radius: float = DRONE_SIZE  # d_col
    capture_ends_episode: bool = True
    evader_mode: str = "constant_speed"
    quad: QuadrotorParams = field(default_factory=QuadrotorParams)


@dataclass
class EpisodeResult:
    """Outcome of one episode."""

    captured: bool
    capture_timestep: int
    per_drone_return: tuple[float, ...]
    capture_return: float
    task: TaskParams
    seed: int
    trajectory: list[dict] | None = None

    def to_dict(self) -> dict:
        return {
            "captured": self.captured,
            "capture_timestep": self.capture_timestep,
            "per_drone_return": list(self.per_drone_return),
            "capture_return": self.capture_return,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class Metrics:
    """Capture statistics over a batch of episodes."""

    capture_rate: float
    mean_capture_timestep: float
    episode_count: int


class Policy(Protocol):
    """Joint pursuit policy driving all drones of one episode."""

    def begin_episode(self, task: TaskParams, seed: int) -> None: ...

    def act(self, world: WorldState) -> Sequence[DroneCommand]: ...

    def end_episode(self, result: EpisodeResult) -> None: ...


# --- single-state operations ----------------------------------------------------


def pairwise_capture_distance(world: WorldState) -> float:
    """Minimum drone-to-evader distance."""
    drone_pos = np.stack([d.position for d in world.drones])
    return float(np.min(norm3(drone_pos - world.evader.position)))


def check_capture(world: WorldState, capture_radius: float) -> bool:
    """True iff some drone is strictly closer than the capture radius."""
    return pairwise_capture_distance(world) < capture_radius


def compute_reward(
    world: WorldState, capture_radius: float, collision_radius: float
) -> np.ndarray:
    """Per-drone rewards at this state: +10 to all on capture, -1 per colliding drone."""
    drone_pos = np.stack([d.position for d in world.drones])[None]
    captured = check_capture(world, capture_radius)
    rewards = np.full(world.n_drones, 10.0 if captured else 0.0)
    obstacles = world.task.external.obstacles
    if obstacles:
        cx = np.array([o.center_xy[0] for o in obstacles]).reshape(1, 1, -1)
        cy = np.array([o.center_xy[1] for o in obstacles]).reshape(1, 1, -1)
        r = np.array([o.radius for o in obstacles]).reshape(1, 1, -1)
        h = np.array([o.height for o in obstacles]).reshape(1, 1, -1)
        dist = distance_to_cylinder_solid(drone_pos[:, :, None, :], cx, cy, r, h)
        colliding = np.any(dist < collision_radius, axis=-1)[0]
        rewards = rewards - colliding.astype(np.float64)
    return rewards


def aggregate_metrics(results: Sequence[EpisodeResult]) -> Metrics:
    """Capture rate and mean capture timestep (failures count as the horizon)."""
    if not results:
        raise ValueError("aggregate_metrics: empty result list")
    rate = float(np.mean([r.captured for r in results]))
    mean_ts = float(np.mean([r.capture_timestep for r in results]))
    return Metrics(capture_rate=rate, mean_capture_timestep=mean_ts, episode_count=len(results))


# --- batched engine ---------------------------------------------------------------


@dataclass
class _Batch:
    tasks: list[TaskParams]
    seeds: list[int]
    drone_pos: np.ndarray  # (B, N, 3)
    drone_vel: np.ndarray  # (B, N, 3)
    drone_quat: np.ndarray  # (B, N, 4)
    drone_rate: np.ndarray  # (B, N, 3)
    evader_pos: np.ndarray  # (B, 3)
    evader_vel: np.ndarray  # (B, 3)
    evader_heading: np.ndarray  # (B, 3)
    obs_cx: np.ndarray  # (B, K)
    obs_cy: np.ndarray
    obs_radius: np.ndarray
    obs_height: np.ndarray
    obs_mask: np.ndarray
    capture_radius: np.ndarray  # (B,)
    evader_speed: np.ndarray  # (B,)
    active: np.ndarray  # (B,) bool
    captured: np.ndarray  # (B,) bool
    capture_step: np.ndarray  # (B,) int
    per_drone_return: np.ndarray  # (B, N)
    capture_return: np.ndarray  # (B,)
    arena: ArenaSpec

    @property
    def size(self) -> int:
        return len(self.tasks)

    @property
    def n_drones(self) -> int:
        return self.drone_pos.shape[1]


def _make_batch(
    tasks: Sequence[TaskParams],
    seeds: Sequence[int],
    options: EpisodeOptions,
    obstacle_slots: int | None = None,
) -> _Batch:
    if len(tasks) != len(seeds):
        raise ValueError("tasks and seeds must have equal length")
    n_set = {t.external.n_drones for t in tasks}
    if len(n_set) != 1:
        raise ValueError(f"all tasks in a batch need the same drone count, got {n_set}")
    arenas = {t.arena for t in tasks}
    if len(arenas) != 1:
        raise ValueError("all tasks in a batch need the same arena")
    arena = tasks[0].arena
    b, n = len(tasks), n_set.pop()
    k = max(len(t.external.obstacles) for t in tasks)
    if obstacle_slots is not None:
        if obstacle_slots < k:
            raise ValueError(f"obstacle_slots={obstacle_slots} below batch maximum {k}")
        k = obstacle_slots

    drone_pos = np.array([t.external.drone_spawns for t in tasks], dtype=np.float64)
    evader_pos = _inset_clamp(
        np.array([t.external.evader_spawn for t in tasks], dtype=np.float64), arena
    )

    obs_cx = np.zeros((b, k))
    obs_cy = np.zeros((b, k))
    obs_radius = np.zeros((b, k))
    obs_height = np.zeros((b, k))
    obs_mask = np.zeros((b, k))
    for i, t in enumerate(tasks):
        for j, o in enumerate(t.external.obstacles):
            obs_cx[i, j] = o.center_xy[0]
            obs_cy[i, j] = o.center_xy[1]
            obs_radius[i, j] = o.radius
            obs_height[i, j] = o.height
            obs_mask[i, j] = 1.0

    quat = np.zeros((b, n, 4))
    quat[..., 0] = 1.0
    return _Batch(
        tasks=list(tasks),
        seeds=list(seeds),
        drone_pos=drone_pos,
        drone_vel=np.zeros((b, n, 3)),
        drone_quat=quat,
        drone_rate=np.zeros((b, n, 3)),
        evader_pos=evader_pos,
        evader_vel=np.zeros((b, 3)),
        evader_heading=np.zeros((b, 3)),
        obs_cx=obs_cx,
        obs_cy=obs_cy,
        obs_radius=obs_radius,
        obs_height=obs_height,
        obs_mask=obs_mask,
        capture_radius=np.array([t.intrinsic.capture_radius for t in tasks]),
        evader_speed=np.array([t.intrinsic.evader_speed for t in tasks]),
        active=np.ones(b, dtype=bool),
        captured=np.zeros(b, dtype=bool),
        capture_step=np.full(b, options.horizon, dtype=np.int64),
        per_drone_return=np.zeros((b, n)),
        capture_return=np.zeros(b),
        arena=arena,
    )


def _inset_clamp(position: np.ndarray, arena: ArenaSpec) -> np.ndarray:
    return clamp_inside_cylinder(position, arena.radius, arena.height, ARENA_INSET)


def _freeze(active: np.ndarray, new: np.ndarray, old: np.ndarray) -> np.ndarray:
    """Keep rows of finished episodes bit-unchanged."""
    mask = active
    while mask.ndim < new.ndim:
        mask = mask[..., None]
    return np.where(mask, new, old)


def _step_drones_velocity(batch: _Batch, v_cmd: np.ndarray, options: EpisodeOptions) -> None:
    pos, vel, quat = step_velocity_arrays(
        batch.drone_pos, batch.drone_vel, v_cmd, options.quad, batch.arena
    )
    batch.drone_pos = _freeze(batch.active, pos, batch.drone_pos)
    batch.drone_vel = _freeze(batch.active, vel, batch.drone_vel)
    batch.drone_quat = _freeze(batch.active, quat, batch.drone_quat)


def _step_evader(batch: _Batch, options: EpisodeOptions) -> None:
    _, _, _, total = evader_force_arrays(
        batch.evader_pos,
        batch.drone_pos,
        batch.obs_cx,
        batch.obs_cy,
        batch.obs_radius,
        batch.obs_height,
        batch.obs_mask,
        batch.arena,
    )
    velocity = evader_velocity_arrays(
        total, batch.evader_heading, batch.evader_speed, mode=options.evader_mode
    )
    new_pos = _inset_clamp(batch.evader_pos + velocity * options.quad.dt, batch.arena)
    moving = norm3(velocity) > 0.0
    new_heading = np.where(moving[..., None], unit3(velocity), batch.evader_heading)
    batch.evader_pos = _freeze(batch.active, new_pos, batch.evader_pos)
    batch.evader_vel = _freeze(batch.active, velocity, batch.evader_vel)
    batch.evader_heading = _freeze(batch.active, new_heading, batch.evader_heading)


def _score_step(
    batch: _Batch, step: int, options: EpisodeOptions, collisions: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Rewards for this tick plus the per-row capture events; updates accumulators.

    ``step`` is the number of completed moves: step 0 is the spawn state,
    checked for capture only (no collision penalties before any motion).
    The capture timestep therefore lands in [0, horizon], with the horizon
    value reserved for failures.
    """
    dist = norm3(batch.drone_pos - batch.evader_pos[:, None, :])
    captured_now = (np.min(dist, axis=-1) < batch.capture_radius) & batch.active

    rewards = np.where(captured_now[:, None], 10.0, 0.0)
    if collisions and batch.obs_cx.shape[1] > 0:
        obs_dist = distance_to_cylinder_solid(
            batch.drone_pos[:, :, None, :],
            batch.obs_cx[:, None, :],
            batch.obs_cy[:, None, :],
            batch.obs_radius[:, None, :],
            batch.obs_height[:, None, :],
        )
        colliding = np.any(
            (obs_dist < options.collision_radius) & (batch.obs_mask[:, None, :] > 0.0),
            axis=-1,
        )
        rewards = rewards - colliding.astype(np.float64)

    active_f = batch.active.astype(np.float64)
    batch.per_drone_return += rewards * active_f[:, None]
    batch.capture_return += np.where(captured_now, 10.0, 0.0)
    first_capture = captured_now & ~batch.captured
    batch.capture_step = np.where(first_capture, step, batch.capture_step)
    batch.captured |= captured_now
    if options.capture_ends_episode:
        batch.active &= ~captured_now
    return rewards, captured_now


def _batch_results(batch: _Batch) -> list[EpisodeResult]:
    return [
        EpisodeResult(
            captured=bool(batch.captured[i]),
            capture_timestep=int(batch.capture_step[i]),
            per_drone_return=tuple(float(x) for x in batch.per_drone_return[i]),
            capture_return=float(batch.capture_return[i]),
            task=batch.tasks[i],
            seed=batch.seeds[i],
        )
        for i in range(batch.size)
    ]


def run_batch(
    tasks: Sequence[TaskParams],
    config: PolicyConfig,
    seeds: Sequence[int],
    options: EpisodeOptions | None = None,
    obstacle_slots: int | None = None,
) -> list[EpisodeResult]:
    """Run one episode per task with a built-in heuristic policy, vectorized."""
    options = options or EpisodeOptions()
    batch = _make_batch(tasks, seeds, options, obstacle_slots)
    delay = getattr(config, "command_delay", 0)
    pending: list[np.ndarray] = []
    _score_step(batch, 0, options, collisions=False)  # spawn-capture check
    for step in range(1, options.horizon + 1):
        if not batch.active.any():
            break
        v_cmd = heuristic_commands(
            config,
            batch.drone_pos,
            batch.drone_vel,
            batch.evader_pos,
            batch.evader_vel,
            batch.obs_cx,
            batch.obs_cy,
            batch.obs_radius,
            batch.obs_height,
            batch.obs_mask,
            options.quad.max_speed,
            batch.arena,
        )
        if delay > 0:  # hold commands back; zero commands during warm-up
            pending.append(v_cmd)
            v_cmd = pending.pop(0) if len(pending) > delay else np.zeros_like(v_cmd)
        _step_drones_velocity(batch, v_cmd, options)
        _step_evader(batch, options)
        _score_step(batch, step, options)
    return _batch_results(batch)


def run_scenario_batch(
    task: TaskParams,
    config: PolicyConfig,
    episodes: int,
    seed_base: int,
    options: EpisodeOptions | None = None,
    respawn: bool = True,
    obstacle_slots: int | None = None,
) -> list[EpisodeResult]:
    """Repeat one scenario for ``episodes`` episodes.

    Per-episode seeds are ``seed_base + episode_index``. With ``respawn`` (the
    default) each episode redraws spawn positions for the scenario's fixed
    obstacle layout, rejecting draws the task filter would reject; without it
    every episode starts from the scenario's canonical spawns.
    """
    tasks = [
        materialize_episode_task(task, seed_base + i, respawn=respawn)
        for i in range(episodes)
    ]
    return run_batch(
        tasks, config, [seed_base + i for i in range(episodes)], options, obstacle_slots
    )


def materialize_episode_task(task: TaskParams, seed: int, respawn: bool = True) -> TaskParams:
    """The concrete task an episode with this seed runs (spawns resampled or fixed)."""
    if not respawn:
        return task
    rng = np.random.default_rng(seed)
    config = RandomizationConfig(n_drones=task.external.n_drones, arena=task.arena)
    grid = feasibility.rasterize(task.external, task.arena, DRONE_SIZE)
    for _ in range(config.max_attempts):
        external = resample_spawns(rng, task.external, config)
        cells = [grid.cell_of(p[0], p[1]) for p in external.drone_spawns]
        if feasibility.is_feasible(grid, cells, grid.cell_of(*external.evader_spawn[:2])):
            return replace(task, external=external)
    raise PolicyError("could not respawn a feasible episode start")


# --- single-episode driver --------------------------------------------------------


def _world_from_batch(batch: _Batch, step: int) -> WorldState:
    drones = [
        DroneState(
            position=batch.drone_pos[0, i].copy(),
            velocity=batch.drone_vel[0, i].copy(),
            orientation=batch.drone_quat[0, i].copy(),
            body_rate=batch.drone_rate[0, i].copy(),
        )
        for i in range(batch.n_drones)
    ]
    evader = EvaderState(
        position=batch.evader_pos[0].copy(),
        velocity=batch.evader_vel[0].copy(),
        last_heading=batch.evader_heading[0].copy(),
    )
    return WorldState(drones=drones, evader=evader, step_index=step, task=batch.tasks[0])


def _apply_commands(
    batch: _Batch, commands: Sequence[DroneCommand], options: EpisodeOptions
) -> None:
    n = batch.n_drones
    if len(commands) != n:
        raise PolicyError(f"commands: expected {n} entries, got {len(commands)}")
    v_idx = [i for i, c in enumerate(commands) if isinstance(c, VelocityCommand)]
    t_idx = [i for i, c in enumerate(commands) if isinstance(c, ThrustRateCommand)]
    if len(v_idx) + len(t_idx) != n:
        bad = next(
            i for i, c in enumerate(commands)
            if not isinstance(c, (VelocityCommand, ThrustRateCommand))
        )
        raise PolicyError(f"commands[{bad}]: unsupported command type {type(commands[bad]).__name__}")
    if v_idx:
        v_cmd = np.array([commands[i].v_cmd for i in v_idx], dtype=np.float64)[None]
        pos, vel, quat = step_velocity_arrays(
            batch.drone_pos[:, v_idx], batch.drone_vel[:, v_idx], v_cmd, options.quad, batch.arena
        )
        batch.drone_pos[:, v_idx] = pos
        batch.drone_vel[:, v_idx] = vel
        batch.drone_quat[:, v_idx] = quat
        batch.drone_rate[:, v_idx] = 0.0
    if t_idx:
        thrust = np.array([commands[i].thrust for i in t_idx], dtype=np.float64)[None]
        rate_cmd = np.array([commands[i].body_rate for i in t_idx], dtype=np.float64)[None]
        pos, vel, quat, rate = step_quadrotor_arrays(
            batch.drone_pos[:, t_idx],
            batch.drone_vel[:, t_idx],
            batch.drone_quat[:, t_idx],
            batch.drone_rate[:, t_idx],
            thrust,
            rate_cmd,
            options.quad,
            batch.arena,
        )
        batch.drone_pos[:, t_idx] = pos
        batch.drone_vel[:, t_idx] = vel
        batch.drone_quat[:, t_idx] = quat
        batch.drone_rate[:, t_idx] = rate


def _trajectory_record(
    batch: _Batch, step: int, rewards: np.ndarray, captured_now: np.ndarray
) -> dict:
    return {
        "step": step,
        "drones": [
            {
                "position": [float(x) for x in batch.drone_pos[0, i]],
                "velocity": [float(x) for x in batch.drone_vel[0, i]],
            }
            for i in range(batch.n_drones)
        ],
        "evader": {
            "position": [float(x) for x in batch.evader_pos[0]],
            "velocity": [float(x) for x in batch.evader_vel[0]],
        },
        "rewards": [float(x) for x in rewards[0]],
        "captured": bool(captured_now[0]),
    }


def run_episode(
    task: TaskParams,
    policy: Policy,
    seed: int,
    options: EpisodeOptions | None = None,
    log_trajectory: bool = False,
    step_observer=None,
) -> EpisodeResult:
    """Run one episode under an arbitrary (possibly external) joint policy.

    Policy failures raise :class:`PolicyError`; no fabricated result is
    returned. The trajectory log, when requested, carries one record per
    executed step. ``step_observer(step, rewards, captured, done)`` fires
    after each step's scoring (the bridge uses it to stream rewards).
    """
    options = options or EpisodeOptions()
    batch = _make_batch([task], [seed], options)
    if hasattr(policy, "begin_episode"):
        policy.begin_episode(task, seed)
    trajectory: list[dict] | None = [] if log_trajectory else None
    rewards, captured_now = _score_step(batch, 0, options, collisions=False)
    if trajectory is not None:
        trajectory.append(_trajectory_record(batch, 0, rewards, captured_now))
    for step in range(1, options.horizon + 1):
        if not batch.active.any():
            break
        world = _world_from_batch(batch, step - 1)
        commands = policy.act(world)
        _apply_commands(batch, commands, options)
        _step_evader(batch, options)
        rewards, captured_now = _score_step(batch, step, options)
        done = not batch.active.any() or step == options.horizon
        if trajectory is not None:
            trajectory.append(_trajectory_record(batch, step, rewards, captured_now))
        if step_observer is not None:
            step_observer(step, rewards[0], bool(captured_now[0]), done)
        if done:
            break
    result = _batch_results(batch)[0]
    result.trajectory = trajectory
    if hasattr(policy, "end_episode"):
        policy.end_episode(result)
    return result

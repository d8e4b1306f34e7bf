"""Drone motion models.

Two models share one parameter block:

* a velocity-tracking model for heuristic pursuers that command desired
  velocities (the inner control stack collapses to a first-order lag), and
* a reduced quadrotor model for learners that command collective thrust plus
  desired body rate.

The ``*_arrays`` kernels broadcast over arbitrary leading batch axes; the
public single-drone functions wrap them, so batched and sequential stepping
are the same floating-point computation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .geometry import (
    clamp_speed,
    clamp_to_cylinder,
    norm3,
    quat_body_z_axis,
    quat_from_rotvec,
    quat_multiply,
    quat_normalize,
    yaw_quaternion,
)
from .world import ArenaSpec, DroneState


@dataclass(frozen=True)
class QuadrotorParams:
    """Reduced drone model parameters.

    The inner-loop controllers are collapsed into first-order lags: tau_v for
    velocity tracking, tau_omega for body-rate tracking. A zero time constant
    means instantaneous tracking. dt is 0.02 s (50 Hz command rate).
    """

    mass: float = 0.03
    gravity: float = 9.81
    rate_time_constant: float = 0.05
    velocity_time_constant: float = 0.05
    max_speed: float = 1.0
    dt: float = 0.02

    @property
    def max_thrust(self) -> float:
        return 2.0 * self.mass * self.gravity

    @property
    def velocity_lag(self) -> float:
        """exp(-dt/tau_v); 0 when tau_v == 0 (instantaneous tracking)."""
        tau = self.velocity_time_constant
        return math.exp(-self.dt / tau) if tau > 0 else 0.0

    @property
    def rate_lag(self) -> float:
        tau = self.rate_time_constant
        return math.exp(-self.dt / tau) if tau > 0 else 0.0


@dataclass(frozen=True)
class VelocityCommand:
    """Desired world-frame velocity; the model clamps it to max_speed."""

    v_cmd: tuple[float, float, float]


@dataclass(frozen=True)
class ThrustRateCommand:
    """Collective thrust (N, >= 0) plus desired body angular rate (rad/s)."""

    thrust: float
    body_rate: tuple[float, float, float]


DroneCommand = Union[VelocityCommand, ThrustRateCommand]


def clamp_to_arena(position: np.ndarray, arena: ArenaSpec) -> np.ndarray:
    """Project a position into the arena cylinder (identity inside)."""
    return clamp_to_cylinder(np.asarray(position, dtype=np.float64), arena.radius, arena.height)


# --- batched kernels ----------------------------------------------------------


def step_velocity_arrays(
    position: np.ndarray,
    velocity: np.ndarray,
    v_cmd: np.ndarray,
    params: QuadrotorParams,
    arena: ArenaSpec,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One velocity-model step. Returns (position, velocity, orientation)."""
    cmd = clamp_speed(np.asarray(v_cmd, dtype=np.float64), params.max_speed)
    lag = params.velocity_lag
    new_velocity = cmd + (velocity - cmd) * lag
    new_velocity = clamp_speed(new_velocity, params.max_speed)
    new_position = clamp_to_cylinder(
        position + new_velocity * params.dt, arena.radius, arena.height
    )
    orientation = yaw_quaternion(new_velocity)
    return new_position, new_velocity, orientation


def step_quadrotor_arrays(
    position: np.ndarray,
    velocity: np.ndarray,
    orientation: np.ndarray,
    body_rate: np.ndarray,
    thrust: np.ndarray,
    rate_cmd: np.ndarray,
    params: QuadrotorParams,
    arena: ArenaSpec,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One reduced-quadrotor step.

    Body rate relaxes toward the command, the attitude integrates the new rate,
    thrust acts along the body z axis against gravity, and speed/position are
    clamped to the drone and arena limits.
    """
    c = np.clip(np.asarray(thrust, dtype=np.float64), 0.0, params.max_thrust)
    new_rate = rate_cmd + (body_rate - rate_cmd) * params.rate_lag
    dq = quat_from_rotvec(new_rate * params.dt)
    new_orientation = quat_normalize(quat_multiply(orientation, dq))
    accel = (c / params.mass)[..., None] * quat_body_z_axis(new_orientation)
    accel = accel - np.array([0.0, 0.0, params.gravity])
    new_velocity = clamp_speed(velocity + accel * params.dt, params.max_speed)
    new_position = clamp_to_cylinder(
        position + new_velocity * params.dt, arena.radius, arena.height
    )
    return new_position, new_velocity, new_orientation, new_rate


# --- single-drone API ---------------------------------------------------------


def step_velocity_model(
    state: DroneState, cmd: VelocityCommand, params: QuadrotorParams, arena: ArenaSpec | None = None
) -> DroneState:
    """Advance one drone by one velocity-tracking step."""
    arena = arena or ArenaSpec()
    pos, vel, quat = step_velocity_arrays(
        state.position, state.velocity, np.asarray(cmd.v_cmd, dtype=np.float64), params, arena
    )
    return DroneState(position=pos, velocity=vel, orientation=quat, body_rate=np.zeros(3))


def step_quadrotor_model(
    state: DroneState,
    cmd: ThrustRateCommand,
    params: QuadrotorParams,
    arena: ArenaSpec | None = None,
) -> DroneState:
    """Advance one drone by one thrust/body-rate step."""
    arena = arena or ArenaSpec()
    pos, vel, quat, rate = step_quadrotor_arrays(
        state.position,
        state.velocity,
        state.orientation,
        state.body_rate,
        np.float64(cmd.thrust),
        np.asarray(cmd.body_rate, dtype=np.float64),
        params,
        arena,
    )
    return DroneState(position=pos, velocity=vel, orientation=quat, body_rate=rate)


def command_speed(cmd: DroneCommand) -> float:
    if isinstance(cmd, VelocityCommand):
        return float(norm3(np.asarray(cmd.v_cmd, dtype=np.float64)))
    return 0.0

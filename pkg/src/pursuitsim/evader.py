"""Scripted evader driven by a potential field.

Every pursuer, every obstacle, and the three arena boundaries (ground,
ceiling, lateral wall) push on the evader:

* pursuer i contributes (x_e - x_p_i) / ||x_e - x_p_i||^2,
* obstacle j contributes d_j / ||d_j||^2 with d_j the vector from the closest
  point on the cylinder (lateral surface or top cap) to the evader,
* boundary k contributes u_k / d_k with u_k the inward unit normal and d_k the
  perpendicular distance.

By default the evader moves at its constant speed along the direction of the
total force ("constant_speed" mode). "eq1_literal" instead scales the raw
force sum by the speed, which makes the actual speed vary with the force
magnitude; it is kept only for comparison runs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    EPS_DIR,
    boundary_inward_terms,
    inverse_square_term,
    norm3,
    vector_from_cylinder_surface,
)
from .world import ArenaSpec, WorldState

#: Supported direction conventions for turning force into velocity.
EVADER_MODES = ("constant_speed", "eq1_literal")


@dataclass
class EvaderForceBreakdown:
    """Per-source force terms acting on the evader; total is their exact sum."""

    drone_terms: np.ndarray  # (N, 3)
    obstacle_terms: np.ndarray  # (K, 3)
    boundary_terms: np.ndarray  # (3, 3): ground, ceiling, lateral wall
    total: np.ndarray  # (3,)


def evader_force_arrays(
    evader_pos: np.ndarray,
    drone_pos: np.ndarray,
    obs_cx: np.ndarray,
    obs_cy: np.ndarray,
    obs_radius: np.ndarray,
    obs_height: np.ndarray,
    obs_mask: np.ndarray,
    arena: ArenaSpec,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batched force terms.

    Shapes: evader_pos (B, 3); drone_pos (B, N, 3); obstacle arrays (B, K)
    with obs_mask 1.0 for live slots and 0.0 for padding. Returns
    (drone_terms (B, N, 3), obstacle_terms (B, K, 3), boundary (B, 3, 3),
    total (B, 3)); padded obstacle slots contribute exact zeros.
    """
    drone_terms = inverse_square_term(evader_pos[..., None, :] - drone_pos)

    surf = vector_from_cylinder_surface(
        evader_pos[..., None, :], obs_cx, obs_cy, obs_radius, obs_height
    )
    obstacle_terms = np.where(
        (obs_mask > 0.0)[..., None], inverse_square_term(surf), 0.0
    )

    boundary = boundary_inward_terms(evader_pos, arena.radius, arena.height)
    total = (
        np.sum(drone_terms, axis=-2)
        + np.sum(obstacle_terms, axis=-2)
        + np.sum(boundary, axis=-2)
    )
    return drone_terms, obstacle_terms, boundary, total


def evader_velocity_arrays(
    total_force: np.ndarray,
    last_heading: np.ndarray,
    evader_speed: np.ndarray,
    mode: str = "constant_speed",
) -> np.ndarray:
    """Velocity from the total force.

    constant_speed: speed is exactly the configured evader speed along the
    force direction; below the direction threshold the last heading is reused
    (zero velocity before any heading exists).
    eq1_literal: velocity = speed * raw force sum.
    """
    if mode not in EVADER_MODES:
        raise ValueError(f"unknown evader mode {mode!r}; expected one of {EVADER_MODES}")
    speed = np.asarray(evader_speed, dtype=np.float64)
    if mode == "eq1_literal":
        return speed[..., None] * total_force
    n = norm3(total_force)
    safe = np.where(n > 0.0, n, 1.0)
    direction = np.where((n > EPS_DIR)[..., None], total_force / safe[..., None], last_heading)
    return speed[..., None] * direction


def _world_obstacle_arrays(world: WorldState) -> tuple[np.ndarray, ...]:
    obstacles = world.task.external.obstacles
    k = len(obstacles)
    cx = np.array([o.center_xy[0] for o in obstacles], dtype=np.float64).reshape(1, k)
    cy = np.array([o.center_xy[1] for o in obstacles], dtype=np.float64).reshape(1, k)
    r = np.array([o.radius for o in obstacles], dtype=np.float64).reshape(1, k)
    h = np.array([o.height for o in obstacles], dtype=np.float64).reshape(1, k)
    mask = np.ones((1, k), dtype=np.float64)
    return cx, cy, r, h, mask


def evader_force(world: WorldState) -> EvaderForceBreakdown:
    """Force breakdown for the current world state."""
    evader_pos = world.evader.position.reshape(1, 3)
    if world.drones:
        drone_pos = np.stack([d.position for d in world.drones]).reshape(1, -1, 3)
    else:
        drone_pos = np.zeros((1, 0, 3))
    cx, cy, r, h, mask = _world_obstacle_arrays(world)
    drone_terms, obstacle_terms, boundary, total = evader_force_arrays(
        evader_pos, drone_pos, cx, cy, r, h, mask, world.task.arena
    )
    return EvaderForceBreakdown(
        drone_terms=drone_terms[0],
        obstacle_terms=obstacle_terms[0],
        boundary_terms=boundary[0],
        total=total[0],
    )


def evader_velocity(world: WorldState, mode: str = "constant_speed") -> np.ndarray:
    """Velocity the evader will fly this step (not yet integrated)."""
    breakdown = evader_force(world)
    v = evader_velocity_arrays(
        breakdown.total.reshape(1, 3),
        world.evader.last_heading.reshape(1, 3),
        np.float64(world.task.intrinsic.evader_speed).reshape(1),
        mode=mode,
    )
    return v[0]

"""Shared geometric primitives for the cylindrical arena and cylinder obstacles.

All functions broadcast over leading batch axes so the same code serves a
single agent and a batch of parallel episodes. Vector norms are computed
component-by-component in a fixed order so results are bit-identical
regardless of batch shape.
"""
from __future__ import annotations

import numpy as np

# Distances below this saturate instead of blowing up in inverse-distance laws.
EPS_DIST = 1e-6
# Force totals below this count as "no direction".
EPS_DIR = 1e-9


def norm3(v: np.ndarray) -> np.ndarray:
    """Euclidean norm over the trailing xyz axis, fixed evaluation order."""
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.sqrt(x * x + y * y + z * z)


def norm2(v: np.ndarray) -> np.ndarray:
    """Euclidean norm over a trailing xy axis."""
    x, y = v[..., 0], v[..., 1]
    return np.sqrt(x * x + y * y)


def unit3(v: np.ndarray, fallback: float = 0.0) -> np.ndarray:
    """Normalize trailing xyz vectors; zero-length vectors map to `fallback`."""
    n = norm3(v)
    safe = np.where(n > 0.0, n, 1.0)
    u = v / safe[..., None]
    return np.where((n > 0.0)[..., None], u, fallback)


def clamp_speed(v: np.ndarray, limit: float) -> np.ndarray:
    """Rescale trailing xyz vectors whose norm exceeds `limit`; others pass through."""
    n = norm3(v)
    safe = np.where(n > 0.0, n, 1.0)
    scale = np.where(n > limit, limit / safe, 1.0)
    return v * scale[..., None]


#: Relative slack on radial clamping. Projection onto the circle can overshoot
#: the radius by an ulp or two; tolerating that makes the clamp exactly
#: idempotent instead of oscillating in the last bit.
_CLAMP_SLACK = 1e-14


def clamp_to_cylinder(position: np.ndarray, radius: float, height: float) -> np.ndarray:
    """Project points onto the solid cylinder {x^2+y^2 <= R^2, 0 <= z <= h}.

    The cylinder is a product of a disk and an interval, so the Euclidean
    projection splits: clamp the xy part onto the disk, clamp z onto [0, h].
    Interior points are returned bit-unchanged and the clamp is idempotent.
    """
    position = np.asarray(position, dtype=np.float64)
    rho = norm2(position[..., :2])
    safe = np.where(rho > 0.0, rho, 1.0)
    scale = np.where(rho > radius * (1.0 + _CLAMP_SLACK), radius / safe, 1.0)
    out = position.copy()
    out[..., 0] = position[..., 0] * scale
    out[..., 1] = position[..., 1] * scale
    out[..., 2] = np.clip(position[..., 2], 0.0, height)
    return out


def clamp_inside_cylinder(
    position: np.ndarray, radius: float, height: float, inset: float
) -> np.ndarray:
    """Like clamp_to_cylinder but keeps points strictly inside by `inset`."""
    position = np.asarray(position, dtype=np.float64)
    rho = norm2(position[..., :2])
    r_max = radius - inset
    safe = np.where(rho > 0.0, rho, 1.0)
    scale = np.where(rho > r_max * (1.0 + _CLAMP_SLACK), r_max / safe, 1.0)
    out = position.copy()
    out[..., 0] = position[..., 0] * scale
    out[..., 1] = position[..., 1] * scale
    out[..., 2] = np.clip(position[..., 2], inset, height - inset)
    return out


def distance_to_cylinder_solid(
    position: np.ndarray,
    center_x: np.ndarray,
    center_y: np.ndarray,
    cyl_radius: np.ndarray,
    cyl_height: np.ndarray,
) -> np.ndarray:
    """Distance from points to solid cylinders (0 inside). Broadcasts all args."""
    dx = position[..., 0] - center_x
    dy = position[..., 1] - center_y
    rho = np.sqrt(dx * dx + dy * dy)
    radial = np.maximum(rho - cyl_radius, 0.0)
    vertical = np.maximum(position[..., 2] - cyl_height, 0.0)
    return np.sqrt(radial * radial + vertical * vertical)


def vector_from_cylinder_surface(
    position: np.ndarray,
    center_x: np.ndarray,
    center_y: np.ndarray,
    cyl_radius: np.ndarray,
    cyl_height: np.ndarray,
) -> np.ndarray:
    """Vector from the closest point on a cylinder's surface to each query point.

    Outside the solid this is the usual clamp-based offset (lateral wall or top
    cap, or the rim between them). Inside the solid the offset points outward
    through the nearest surface patch (lateral wall, top, or ground cap) so an
    inverse-distance repulsion still pushes agents out of the volume; at the
    exact axis with the lateral wall nearest the direction is undefined and the
    vector is zero.
    """
    pos = np.asarray(position, dtype=np.float64)
    dx = pos[..., 0] - center_x
    dy = pos[..., 1] - center_y
    pz = pos[..., 2]
    rho = np.sqrt(dx * dx + dy * dy)

    inside = (rho <= cyl_radius) & (pz >= 0.0) & (pz <= cyl_height)

    # Outside: offset from the clamped (closest) point of the solid.
    rho_safe = np.where(rho > 0.0, rho, 1.0)
    rho_cl = np.minimum(rho, cyl_radius)
    out_x = dx - dx / rho_safe * rho_cl
    out_y = dy - dy / rho_safe * rho_cl
    out_z = pz - np.clip(pz, 0.0, cyl_height)

    # Inside: outward along the nearest of lateral wall / top cap / ground cap.
    d_lat = cyl_radius - rho
    d_top = cyl_height - pz
    d_bot = pz
    lat_best = (d_lat <= d_top) & (d_lat <= d_bot)
    top_best = ~lat_best & (d_top <= d_bot)
    ux = np.where(rho > 0.0, dx / rho_safe, 0.0)
    uy = np.where(rho > 0.0, dy / rho_safe, 0.0)
    lat_ok = lat_best & (rho > 0.0)
    in_x = np.where(lat_ok, ux * d_lat, 0.0)
    in_y = np.where(lat_ok, uy * d_lat, 0.0)
    in_z = np.where(lat_best, 0.0, np.where(top_best, d_top, -d_bot))
    in_z = np.where(lat_best & ~lat_ok, 0.0, in_z)

    vx = np.where(inside, in_x, out_x)
    vy = np.where(inside, in_y, out_y)
    vz = np.where(inside, in_z, out_z)
    return np.stack([vx, vy, vz], axis=-1)


def boundary_inward_terms(position: np.ndarray, radius: float, height: float) -> np.ndarray:
    """Inward 1/distance forces from ground, ceiling and lateral wall.

    Output shape (..., 3, 3): term k is (unit inward normal) / (perpendicular
    distance to boundary k), distances saturated at EPS_DIST. At the exact
    cylinder axis the lateral direction is undefined and the wall term is zero.
    """
    pos = np.asarray(position, dtype=np.float64)
    z = pos[..., 2]
    zero = np.zeros_like(z)

    ground = np.stack([zero, zero, 1.0 / np.maximum(z, EPS_DIST)], axis=-1)
    ceiling = np.stack([zero, zero, -1.0 / np.maximum(height - z, EPS_DIST)], axis=-1)

    rho = norm2(pos[..., :2])
    rho_safe = np.where(rho > 0.0, rho, 1.0)
    inv_wall = 1.0 / np.maximum(radius - rho, EPS_DIST)
    off_axis = rho > 0.0
    wall = np.stack(
        [
            np.where(off_axis, -pos[..., 0] / rho_safe * inv_wall, 0.0),
            np.where(off_axis, -pos[..., 1] / rho_safe * inv_wall, 0.0),
            zero,
        ],
        axis=-1,
    )
    return np.stack([ground, ceiling, wall], axis=-2)


def inverse_square_term(offset: np.ndarray) -> np.ndarray:
    """offset / ||offset||^2 with magnitude saturated at 1/EPS_DIST near zero.

    Zero offsets (no defined direction) yield a zero term.
    """
    n = norm3(offset)
    safe = np.where(n > 0.0, n, 1.0)
    # Magnitude 1/n, saturated at 1/EPS_DIST; direction offset/n.
    mag = 1.0 / np.maximum(safe, EPS_DIST)
    term = offset / safe[..., None] * mag[..., None]
    return np.where((n > 0.0)[..., None], term, 0.0)


def quat_multiply(q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternions stored (w, x, y, z) on the trailing axis."""
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    rw, rx, ry, rz = r[..., 0], r[..., 1], r[..., 2], r[..., 3]
    return np.stack(
        [
            qw * rw - qx * rx - qy * ry - qz * rz,
            qw * rx + qx * rw + qy * rz - qz * ry,
            qw * ry - qx * rz + qy * rw + qz * rx,
            qw * rz + qx * ry - qy * rx + qz * rw,
        ],
        axis=-1,
    )


def quat_from_rotvec(rotvec: np.ndarray) -> np.ndarray:
    """Unit quaternion for a rotation vector (axis * angle)."""
    angle = norm3(rotvec)
    half = 0.5 * angle
    safe = np.where(angle > 0.0, angle, 1.0)
    s = np.where(angle > 0.0, np.sin(half) / safe, 0.5)
    w = np.cos(half)
    return np.stack([w, rotvec[..., 0] * s, rotvec[..., 1] * s, rotvec[..., 2] * s], axis=-1)


def quat_normalize(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    n = np.sqrt(w * w + x * x + y * y + z * z)
    return q / n[..., None]


def quat_body_z_axis(q: np.ndarray) -> np.ndarray:
    """World-frame direction of the body z axis for quaternions (w, x, y, z)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    return np.stack(
        [
            2.0 * (x * z + w * y),
            2.0 * (y * z - w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
        axis=-1,
    )


def yaw_quaternion(velocity: np.ndarray, eps: float = EPS_DIR) -> np.ndarray:
    """Quaternion yawing the body x axis along the horizontal velocity.

    Identity when the horizontal speed is below `eps` (stationary or purely
    vertical motion keeps the current convention of a level, unyawed body).
    """
    vx, vy = velocity[..., 0], velocity[..., 1]
    speed_xy = np.sqrt(vx * vx + vy * vy)
    yaw = np.arctan2(vy, vx)
    half = 0.5 * yaw
    moving = speed_xy > eps
    w = np.where(moving, np.cos(half), 1.0)
    z = np.where(moving, np.sin(half), 0.0)
    zero = np.zeros_like(w)
    return np.stack([w, zero, zero, z], axis=-1)

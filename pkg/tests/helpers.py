"""Shared test fixtures and independent oracles.

The oracles here recompute expected values from first principles with plain
Python floats, deliberately not reusing the package's vectorized kernels.
"""
from __future__ import annotations

import json
import math
import socket
from collections import deque

from pursuitsim import (
    ArenaSpec,
    ExternalParams,
    IntrinsicParams,
    Obstacle,
    TaskParams,
)
from pursuitsim.world import WorldState

ARENA = ArenaSpec(0.9, 1.2)


def make_task(
    drones,
    evader,
    obstacles=(),
    capture_radius=0.12,
    evader_speed=2.4,
    arena=ARENA,
) -> TaskParams:
    return TaskParams(
        intrinsic=IntrinsicParams(capture_radius, evader_speed),
        external=ExternalParams(
            drone_spawns=tuple(tuple(float(x) for x in p) for p in drones),
            evader_spawn=tuple(float(x) for x in evader),
            obstacles=tuple(obstacles),
        ),
        arena=arena,
    )


def make_world(evader, drones=(), obstacles=(), evader_speed=2.4, capture_radius=0.12):
    """World at step 0; ``drones`` may be empty for evader-only force checks."""
    task = make_task(
        drones or [(0.0, -0.8, 0.6)], evader, obstacles,
        capture_radius=capture_radius, evader_speed=evader_speed,
    )
    world = WorldState.initial(task)
    if not drones:
        world.drones = []
    return world


# --- independent evader-force oracle -----------------------------------------------


def _saturated_inverse_square(dx, dy, dz, eps=1e-6):
    n = math.sqrt(dx * dx + dy * dy + dz * dz)
    if n == 0.0:
        return (0.0, 0.0, 0.0)
    mag = 1.0 / max(n, eps)
    return (dx / n * mag, dy / n * mag, dz / n * mag)


def oracle_drone_term(evader, drone):
    return _saturated_inverse_square(
        evader[0] - drone[0], evader[1] - drone[1], evader[2] - drone[2]
    )


def oracle_obstacle_term(evader, obstacle: Obstacle):
    """Inverse-square push from the closest point on the finite cylinder."""
    cx, cy = obstacle.center_xy
    dx, dy = evader[0] - cx, evader[1] - cy
    rho = math.hypot(dx, dy)
    rho_cl = min(rho, obstacle.radius)
    if rho > 0:
        closest = (cx + dx / rho * rho_cl, cy + dy / rho * rho_cl)
    else:
        closest = (cx, cy)
    cz = min(max(evader[2], 0.0), obstacle.height)
    return _saturated_inverse_square(
        evader[0] - closest[0], evader[1] - closest[1], evader[2] - cz
    )


def oracle_boundary_terms(evader, arena: ArenaSpec = ARENA, eps=1e-6):
    """Ground, ceiling, lateral-wall terms as (unit inward) / distance."""
    ground = (0.0, 0.0, 1.0 / max(evader[2], eps))
    ceiling = (0.0, 0.0, -1.0 / max(arena.height - evader[2], eps))
    rho = math.hypot(evader[0], evader[1])
    if rho > 0:
        d = max(arena.radius - rho, eps)
        wall = (-evader[0] / rho / d, -evader[1] / rho / d, 0.0)
    else:
        wall = (0.0, 0.0, 0.0)
    return ground, ceiling, wall


def oracle_total_force(evader, drones=(), obstacles=(), arena: ArenaSpec = ARENA):
    terms = [oracle_drone_term(evader, d) for d in drones]
    terms += [oracle_obstacle_term(evader, o) for o in obstacles]
    terms += list(oracle_boundary_terms(evader, arena))
    return tuple(sum(t[i] for t in terms) for i in range(3))


# --- bridge test client ---------------------------------------------------------------


def zero_commands(obs_msg, hello):
    n = len(obs_msg["observations"])
    return {"type": "act", "commands": [{"kind": "velocity", "v": [0.0, 0.0, 0.0]}] * n}


def pure_pursuit_commands(obs_msg, hello, v_p=1.0):
    """Pursuit from the observation's evader-relative-position slot.

    Mirrors the in-process pure-pursuit float operations exactly:
    component / norm * speed, with math.sqrt == np.sqrt on IEEE doubles.
    """
    commands = []
    for row in obs_msg["observations"]:
        dx, dy, dz = row[10], row[11], row[12]
        n = math.sqrt(dx * dx + dy * dy + dz * dz)
        if n > 0.0:
            v = [dx / n * v_p, dy / n * v_p, dz / n * v_p]
        else:
            v = [0.0, 0.0, 0.0]
        commands.append({"kind": "velocity", "v": v})
    return {"type": "act", "commands": commands}


def bridge_session(address, act_fn, version=1, transcript=None):
    """Run a client session; returns (hello, result msgs, error msgs).

    ``act_fn(obs_msg, hello)`` returns the raw message to send in reply to
    each observation. ``transcript``, when given, collects every wire message
    as {"dir": "s2c"|"c2s", "msg": ...} in order.
    """

    def log(direction, msg):
        if transcript is not None:
            transcript.append({"dir": direction, "msg": msg})

    results, errors = [], []
    with socket.create_connection(address, timeout=30) as sock:
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        rfile = sock.makefile("r", encoding="utf-8", newline="\n")
        wfile = sock.makefile("w", encoding="utf-8", newline="\n")
        hello = json.loads(rfile.readline())
        log("s2c", hello)
        greeting = {"type": "hello", "protocol_version": version}
        wfile.write(json.dumps(greeting, separators=(",", ":")) + "\n")
        wfile.flush()
        log("c2s", greeting)
        for line in rfile:
            msg = json.loads(line)
            log("s2c", msg)
            kind = msg.get("type")
            if kind == "obs":
                reply = act_fn(msg, hello)
                wfile.write(json.dumps(reply, separators=(",", ":")) + "\n")
                wfile.flush()
                log("c2s", reply)
            elif kind == "result":
                results.append(msg)
            elif kind == "error":
                errors.append(msg)
    return hello, results, errors


# --- flood-fill reachability oracle -------------------------------------------------


def flood_fill_feasible(blocked, drone_cells, evader_cell) -> bool:
    """Breadth-first search oracle for the DFS-based filter."""
    nx, ny = blocked.shape
    if blocked[evader_cell]:
        return False
    seen = {evader_cell}
    queue = deque([evader_cell])
    while queue:
        x, y = queue.popleft()
        for mx, my in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= mx < nx and 0 <= my < ny and (mx, my) not in seen and not blocked[mx, my]:
                seen.add((mx, my))
                queue.append((mx, my))
    return all(c in seen for c in drone_cells)

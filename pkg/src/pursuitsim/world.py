"""Domain types for the pursuit arena plus domain-randomized scenario sampling.

Task-parameter types store plain tuples of floats so that equality is exact,
instances hash/pickle cleanly, and JSON round-trips are lossless. Runtime
state (drone/evader/world state) holds numpy arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

Vec3 = tuple[float, float, float]

#: Physical edge length of a drone, meters. Also the default feasibility
#: grid cell size and the default collision threshold.
DRONE_SIZE = 0.1

PRESET_NAMES = ("empty", "tower1", "curve2", "tower3", "curve4", "tower5")


class ScenarioError(ValueError):
    """Malformed or invariant-violating scenario document.

    The message carries the offending field path, e.g. ``obstacles[1].height``.
    """


class SamplingError(RuntimeError):
    """Rejection sampling exhausted its attempt budget (over-constrained config)."""


def _vec3(value: Iterable[float], path: str) -> Vec3:
    items = list(value)
    if len(items) != 3:
        raise ScenarioError(f"{path}: expected 3 coordinates, got {len(items)}")
    try:
        return (float(items[0]), float(items[1]), float(items[2]))
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}: non-numeric coordinate ({exc})") from None


@dataclass(frozen=True)
class ArenaSpec:
    """Cylindrical flight volume: lateral radius and ceiling height, meters."""

    radius: float = 0.9
    height: float = 1.2

    def validate(self, path: str = "arena") -> None:
        if not self.radius > 0:
            raise ScenarioError(f"{path}.radius: must be > 0, got {self.radius}")
        if not self.height > 0:
            raise ScenarioError(f"{path}.height: must be > 0, got {self.height}")


@dataclass(frozen=True)
class Obstacle:
    """Vertical cylinder standing on the ground."""

    center_xy: tuple[float, float]
    radius: float = 0.3
    height: float = 1.2

    def validate(self, arena: ArenaSpec, path: str = "obstacle") -> None:
        if not self.radius > 0:
            raise ScenarioError(f"{path}.radius: must be > 0, got {self.radius}")
        if not 0 < self.height <= arena.height:
            raise ScenarioError(
                f"{path}.height: must be in (0, {arena.height}], got {self.height}"
            )
        cx, cy = self.center_xy
        if np.hypot(cx, cy) + self.radius > arena.radius + 1e-12:
            raise ScenarioError(
                f"{path}.center_xy: footprint leaves the arena "
                f"(|center| + radius = {np.hypot(cx, cy) + self.radius:.4f} > {arena.radius})"
            )

    def contains(self, point: Sequence[float]) -> bool:
        """True if the 3-D point lies inside the solid cylinder."""
        x, y, z = point
        cx, cy = self.center_xy
        return bool(np.hypot(x - cx, y - cy) <= self.radius and 0.0 <= z <= self.height)


@dataclass(frozen=True)
class IntrinsicParams:
    """Difficulty knobs scheduled by the curriculum: capture radius, evader speed."""

    capture_radius: float = 0.12
    evader_speed: float = 2.4

    def validate(self, arena: ArenaSpec, path: str = "intrinsic") -> None:
        if not 0 < self.capture_radius <= arena.radius:
            raise ScenarioError(
                f"{path}.capture_radius: must be in (0, {arena.radius}], got {self.capture_radius}"
            )
        if self.evader_speed < 0:
            raise ScenarioError(
                f"{path}.evader_speed: must be >= 0, got {self.evader_speed}"
            )


@dataclass(frozen=True)
class ExternalParams:
    """Scenario geometry: spawn points and the obstacle layout."""

    drone_spawns: tuple[Vec3, ...]
    evader_spawn: Vec3
    obstacles: tuple[Obstacle, ...] = ()

    def validate(
        self,
        arena: ArenaSpec,
        min_separation: float = 2 * DRONE_SIZE,
        path: str = "external",
    ) -> None:
        if len(self.drone_spawns) < 1:
            raise ScenarioError(f"{path}.drones: need at least one drone spawn")
        for j, obs in enumerate(self.obstacles):
            obs.validate(arena, path=f"{path}.obstacles[{j}]")
        points = [(f"{path}.drones[{i}]", p) for i, p in enumerate(self.drone_spawns)]
        points.append((f"{path}.evader", self.evader_spawn))
        for name, p in points:
            x, y, z = p
            if np.hypot(x, y) > arena.radius + 1e-12 or not (0.0 <= z <= arena.height):
                raise ScenarioError(f"{name}: spawn outside the arena cylinder {p}")
            for j, obs in enumerate(self.obstacles):
                if obs.contains(p):
                    raise ScenarioError(
                        f"{name}: spawn inside obstacle [{j}] volume {p}"
                    )
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                d = float(np.linalg.norm(np.subtract(points[i][1], points[j][1])))
                if d < min_separation - 1e-12:
                    raise ScenarioError(
                        f"{points[i][0]} / {points[j][0]}: spawn separation "
                        f"{d:.4f} below the minimum {min_separation}"
                    )

    @property
    def n_drones(self) -> int:
        return len(self.drone_spawns)


@dataclass(frozen=True)
class TaskParams:
    """One pursuit task: intrinsic difficulty pair + external layout + arena."""

    intrinsic: IntrinsicParams
    external: ExternalParams
    arena: ArenaSpec = field(default_factory=ArenaSpec)

    def validate(self) -> None:
        self.arena.validate()
        self.intrinsic.validate(self.arena)
        self.external.validate(self.arena)

    def to_dict(self) -> dict:
        return {
            "arena": {"radius": self.arena.radius, "height": self.arena.height},
            "intrinsic": {
                "capture_radius": self.intrinsic.capture_radius,
                "evader_speed": self.intrinsic.evader_speed,
            },
            "drones": [list(p) for p in self.external.drone_spawns],
            "evader": list(self.external.evader_spawn),
            "obstacles": [
                {
                    "x": o.center_xy[0],
                    "y": o.center_xy[1],
                    "radius": o.radius,
                    "height": o.height,
                }
                for o in self.external.obstacles
            ],
        }


# --- runtime state -----------------------------------------------------------


@dataclass
class DroneState:
    """Kinematic state of one pursuer."""

    position: np.ndarray
    velocity: np.ndarray
    orientation: np.ndarray  # unit quaternion (w, x, y, z)
    body_rate: np.ndarray

    @classmethod
    def at_rest(cls, position: Sequence[float]) -> "DroneState":
        return cls(
            position=np.asarray(position, dtype=np.float64),
            velocity=np.zeros(3),
            orientation=np.array([1.0, 0.0, 0.0, 0.0]),
            body_rate=np.zeros(3),
        )


@dataclass
class EvaderState:
    """Kinematic state of the evader.

    ``last_heading`` holds the most recent nonzero motion direction; the zero
    vector means no heading has been established yet (episode start).
    """

    position: np.ndarray
    velocity: np.ndarray
    last_heading: np.ndarray

    @classmethod
    def at_rest(cls, position: Sequence[float]) -> "EvaderState":
        return cls(
            position=np.asarray(position, dtype=np.float64),
            velocity=np.zeros(3),
            last_heading=np.zeros(3),
        )


@dataclass
class WorldState:
    """Full simulation state at one timestep."""

    drones: list[DroneState]
    evader: EvaderState
    step_index: int
    task: TaskParams

    @property
    def n_drones(self) -> int:
        return len(self.drones)

    @classmethod
    def initial(cls, task: TaskParams) -> "WorldState":
        return cls(
            drones=[DroneState.at_rest(p) for p in task.external.drone_spawns],
            evader=EvaderState.at_rest(task.external.evader_spawn),
            step_index=0,
            task=task,
        )


# --- domain randomization -----------------------------------------------------


@dataclass(frozen=True)
class RandomizationConfig:
    """Knobs for the external-parameter sampler.

    Obstacle heights come from the discrete ``obstacle_heights`` set by
    default; set ``obstacle_height_range`` to draw them uniformly from a
    continuous interval instead.

    ``spawn_margin`` keeps agents away from the lateral wall, floor and
    ceiling. At the default grid cell size (one drone width) this margin also
    guarantees a spawn's grid cell is never blocked by the arena-circle
    rasterization rule, so obstacle-free scenarios always pass the task filter.
    """

    n_drones: int = 4
    n_obstacles_max: int = 3
    n_obstacles_min: int = 0
    obstacle_radius: float = 0.3
    obstacle_heights: tuple[float, ...] = (0.6, 1.2)
    obstacle_height_range: tuple[float, float] | None = None
    spawn_margin: float = DRONE_SIZE
    min_separation: float = 2 * DRONE_SIZE
    arena: ArenaSpec = field(default_factory=ArenaSpec)
    max_attempts: int = 10_000

    def validate(self) -> None:
        self.arena.validate()
        if self.n_drones < 1:
            raise ScenarioError("config.n_drones: need at least one drone")
        if not 0 <= self.n_obstacles_min <= self.n_obstacles_max:
            raise ScenarioError("config.n_obstacles_min/max: inverted range")
        if self.obstacle_radius >= self.arena.radius:
            raise ScenarioError("config.obstacle_radius: obstacle cannot fit in arena")
        if self.obstacle_height_range is not None:
            lo, hi = self.obstacle_height_range
            if not 0 < lo <= hi <= self.arena.height:
                raise ScenarioError(
                    f"config.obstacle_height_range: ({lo}, {hi}) not within "
                    f"(0, {self.arena.height}]"
                )
        else:
            for h in self.obstacle_heights:
                if not 0 < h <= self.arena.height:
                    raise ScenarioError(
                        f"config.obstacle_heights: {h} outside (0, {self.arena.height}]"
                    )


def _sample_in_disk(rng: np.random.Generator, radius: float, max_attempts: int) -> tuple[float, float]:
    for _ in range(max_attempts):
        x = rng.uniform(-radius, radius)
        y = rng.uniform(-radius, radius)
        if x * x + y * y <= radius * radius:
            return x, y
    raise SamplingError("disk rejection sampling exhausted its attempt budget")


def sample_obstacles(rng: np.random.Generator, config: RandomizationConfig) -> tuple[Obstacle, ...]:
    count = int(rng.integers(config.n_obstacles_min, config.n_obstacles_max + 1))
    placeable = config.arena.radius - config.obstacle_radius
    obstacles = []
    for _ in range(count):
        cx, cy = _sample_in_disk(rng, placeable, config.max_attempts)
        if config.obstacle_height_range is not None:
            height = float(rng.uniform(*config.obstacle_height_range))
        else:
            height = float(config.obstacle_heights[rng.integers(len(config.obstacle_heights))])
        obstacles.append(Obstacle(center_xy=(cx, cy), radius=config.obstacle_radius, height=height))
    return tuple(obstacles)


def sample_spawn_points(
    rng: np.random.Generator,
    config: RandomizationConfig,
    obstacles: Sequence[Obstacle],
) -> tuple[tuple[Vec3, ...], Vec3]:
    """Draw drone spawns plus the evader spawn for a fixed obstacle layout.

    Points are uniform over the margin-inset disk (xy, rejection-sampled) and
    uniform in z, re-drawn while they land inside an obstacle volume or within
    ``min_separation`` of an already placed agent.
    """
    arena = config.arena
    r_spawn = arena.radius - config.spawn_margin
    z_lo, z_hi = config.spawn_margin, arena.height - config.spawn_margin
    if r_spawn <= 0 or z_lo >= z_hi:
        raise SamplingError("spawn margin leaves no room inside the arena")
    placed: list[Vec3] = []
    for _ in range(config.n_drones + 1):
        for attempt in range(config.max_attempts):
            x, y = _sample_in_disk(rng, r_spawn, config.max_attempts)
            z = rng.uniform(z_lo, z_hi)
            p = (x, y, z)
            if any(o.contains(p) for o in obstacles):
                continue
            if any(
                np.linalg.norm(np.subtract(p, q)) < config.min_separation for q in placed
            ):
                continue
            placed.append(p)
            break
        else:
            raise SamplingError(
                "spawn rejection sampling exhausted its attempt budget "
                f"({config.max_attempts}); config is over-constrained"
            )
    return tuple(placed[: config.n_drones]), placed[config.n_drones]


def sample_external_params(
    rng: np.random.Generator, config: RandomizationConfig
) -> ExternalParams:
    """Domain-randomized external parameters (not feasibility-filtered).

    Obstacle count is uniform on the configured range, obstacle heights are
    uniform over the allowed set, and all spawn invariants hold by
    construction. Reachability is the task filter's job.
    """
    config.validate()
    obstacles = sample_obstacles(rng, config)
    drone_spawns, evader_spawn = sample_spawn_points(rng, config, obstacles)
    return ExternalParams(
        drone_spawns=drone_spawns, evader_spawn=evader_spawn, obstacles=obstacles
    )


def resample_spawns(
    rng: np.random.Generator, external: ExternalParams, config: RandomizationConfig
) -> ExternalParams:
    """New spawn points for an existing obstacle layout (per-episode respawn)."""
    drone_spawns, evader_spawn = sample_spawn_points(rng, config, external.obstacles)
    return replace(external, drone_spawns=drone_spawns, evader_spawn=evader_spawn)


# --- scenario files -----------------------------------------------------------


def task_from_dict(doc: dict) -> TaskParams:
    if not isinstance(doc, dict):
        raise ScenarioError(f"document: expected an object, got {type(doc).__name__}")
    for key in ("arena", "intrinsic", "drones", "evader"):
        if key not in doc:
            raise ScenarioError(f"{key}: missing required field")
    arena_doc = doc["arena"]
    try:
        arena = ArenaSpec(radius=float(arena_doc["radius"]), height=float(arena_doc["height"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"arena: malformed ({exc})") from None
    intr_doc = doc["intrinsic"]
    try:
        intrinsic = IntrinsicParams(
            capture_radius=float(intr_doc["capture_radius"]),
            evader_speed=float(intr_doc["evader_speed"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"intrinsic: malformed ({exc})") from None
    drones = tuple(
        _vec3(p, f"drones[{i}]") for i, p in enumerate(doc["drones"])
    )
    evader = _vec3(doc["evader"], "evader")
    obstacles = []
    for j, odoc in enumerate(doc.get("obstacles", [])):
        try:
            obstacles.append(
                Obstacle(
                    center_xy=(float(odoc["x"]), float(odoc["y"])),
                    radius=float(odoc["radius"]),
                    height=float(odoc["height"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"obstacles[{j}]: malformed ({exc})") from None
    task = TaskParams(
        intrinsic=intrinsic,
        external=ExternalParams(
            drone_spawns=drones, evader_spawn=evader, obstacles=tuple(obstacles)
        ),
        arena=arena,
    )
    task.validate()
    return task


def load_scenario(source: str) -> TaskParams:
    """Load a task from a preset name, a JSON file path, or raw JSON text."""
    if source in PRESET_NAMES:
        text = (resources.files("pursuitsim") / "scenarios" / f"{source}.json").read_text()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"document: invalid JSON ({exc})") from None
    return task_from_dict(doc)


def save_scenario(task: TaskParams) -> str:
    """Serialize a task to scenario JSON. load(save(task)) == task exactly."""
    return json.dumps(task.to_dict(), indent=2)

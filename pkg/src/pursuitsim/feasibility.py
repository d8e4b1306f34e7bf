"""Task filter: rasterize a scenario to a 2-D grid and check reachability.

A scenario is solvable when every drone's cell connects to the evader's cell
through unblocked 4-neighbor moves. Cells are one drone width; a cell is
blocked when its center falls outside the arena circle or when a full-height
obstacle (height >= arena height, impassable in 3-D) overlaps the cell square
inflated by half a drone width. Shorter obstacles can be flown over and never
block. Rejection-sampling domain-randomized layouts through this check
realizes the filtered scenario distribution the curriculum draws from.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .world import (
    DRONE_SIZE,
    ArenaSpec,
    ExternalParams,
    RandomizationConfig,
    SamplingError,
    sample_external_params,
)

Cell = tuple[int, int]


@dataclass
class OccupancyGrid:
    """Rasterized top-down view of the arena. True cells are blocked."""

    cell_size: float
    origin: tuple[float, float]  # world xy of the (0, 0) cell's lower-left corner
    blocked: np.ndarray  # (nx, ny) bool

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocked.shape

    def cell_of(self, x: float, y: float) -> Cell:
        """Grid cell containing a world point (clamped onto the grid)."""
        nx, ny = self.blocked.shape
        ix = int(np.floor((x - self.origin[0]) / self.cell_size))
        iy = int(np.floor((y - self.origin[1]) / self.cell_size))
        return (min(max(ix, 0), nx - 1), min(max(iy, 0), ny - 1))

    def cell_center(self, cell: Cell) -> tuple[float, float]:
        return (
            self.origin[0] + (cell[0] + 0.5) * self.cell_size,
            self.origin[1] + (cell[1] + 0.5) * self.cell_size,
        )

    def render(self, marks: dict[Cell, str] | None = None) -> str:
        """Text art: '#' blocked, '.' free, optional single-char overlays."""
        marks = marks or {}
        nx, ny = self.blocked.shape
        rows = []
        for iy in range(ny - 1, -1, -1):  # north up
            row = []
            for ix in range(nx):
                ch = "#" if self.blocked[ix, iy] else "."
                row.append(marks.get((ix, iy), ch))
            rows.append("".join(row))
        return "\n".join(rows)


def rasterize(
    external: ExternalParams, arena: ArenaSpec, cell_size: float = DRONE_SIZE
) -> OccupancyGrid:
    """Occupancy grid over the arena's bounding square."""
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    n = int(np.ceil(2.0 * arena.radius / cell_size))
    origin = (-arena.radius, -arena.radius)
    centers = origin[0] + (np.arange(n) + 0.5) * cell_size
    cx_grid, cy_grid = np.meshgrid(centers, centers, indexing="ij")
    blocked = cx_grid * cx_grid + cy_grid * cy_grid > arena.radius * arena.radius

    # Cell squares are inflated by half a drone width before the overlap test.
    half = 0.5 * cell_size + DRONE_SIZE / 2.0
    for obstacle in external.obstacles:
        if obstacle.height < arena.height:
            continue  # can be flown over; never blocks the 2-D grid
        ox, oy = obstacle.center_xy
        # Distance from the obstacle center to each inflated cell square.
        dx = np.maximum(np.abs(cx_grid - ox) - half, 0.0)
        dy = np.maximum(np.abs(cy_grid - oy) - half, 0.0)
        blocked |= dx * dx + dy * dy <= obstacle.radius * obstacle.radius
    return OccupancyGrid(cell_size=cell_size, origin=origin, blocked=blocked)


def reachable_from(grid: OccupancyGrid, start: Cell) -> np.ndarray:
    """Cells reachable from ``start`` by 4-connected moves, via iterative DFS."""
    nx, ny = grid.blocked.shape
    seen = np.zeros((nx, ny), dtype=bool)
    if grid.blocked[start]:
        return seen
    stack = [start]
    seen[start] = True
    while stack:
        x, y = stack.pop()
        for mx, my in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= mx < nx and 0 <= my < ny and not seen[mx, my] and not grid.blocked[mx, my]:
                seen[mx, my] = True
                stack.append((mx, my))
    return seen


def is_feasible(grid: OccupancyGrid, drone_cells: list[Cell], evader_cell: Cell) -> bool:
    """True iff every drone cell reaches the evader cell through free cells.

    A query cell that is itself blocked makes the scenario infeasible.
    """
    nx, ny = grid.blocked.shape
    for cell in [*drone_cells, evader_cell]:
        if not (0 <= cell[0] < nx and 0 <= cell[1] < ny):
            raise ValueError(f"query cell {cell} outside the {nx}x{ny} grid")
    if grid.blocked[evader_cell]:
        return False
    seen = reachable_from(grid, evader_cell)
    return all(bool(seen[c]) for c in drone_cells)


def check_task_feasible(
    external: ExternalParams, arena: ArenaSpec, cell_size: float = DRONE_SIZE
) -> tuple[bool, OccupancyGrid]:
    """Rasterize and test one layout; returns (verdict, grid) for inspection."""
    grid = rasterize(external, arena, cell_size)
    drone_cells = [grid.cell_of(p[0], p[1]) for p in external.drone_spawns]
    evader_cell = grid.cell_of(external.evader_spawn[0], external.evader_spawn[1])
    return is_feasible(grid, drone_cells, evader_cell), grid


def task_filter_sample(
    rng: np.random.Generator,
    config: RandomizationConfig,
    max_rejections: int = 1000,
) -> ExternalParams:
    """Draw domain-randomized external parameters until one passes the filter.

    This is the sampler for the filtered scenario distribution: every returned
    layout is reachable for all drones.
    """
    for _ in range(max_rejections):
        external = sample_external_params(rng, config)
        feasible, _ = check_task_feasible(external, config.arena)
        if feasible:
            return external
    raise SamplingError(
        f"task filter rejected {max_rejections} consecutive samples; "
        "the randomization config admits no (or almost no) feasible scenarios"
    )

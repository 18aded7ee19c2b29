"""The fire micro-world: tree placement, ignition layouts, five spread
variants, wind and humidity modifiers, and burn metrics.

Patch life cycle is tree -> burning -> burned; unoccupied patches never
change. The two isotropic variants (4- and 8-neighbor frontier spread) update
the whole frontier synchronously each tick, so with certain ignition
(no wind, low humidity) the final burn set is exactly graph reachability
over tree patches. The three moving-flame variants keep explicit flame
agents with a heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from .grid import (
    MOORE8_OFFSETS,
    VON4_OFFSETS,
    AXIS_HEADINGS,
    GridError,
    TopologyKind,
    WorldGrid,
    forward_offsets,
    offset_heading,
)
from .rng import Rng


class Cell(IntEnum):
    EMPTY = 0
    TREE = 1
    BURNING = 2
    BURNED = 3


class Spread(Enum):
    BASELINE4 = "baseline4"
    MOORE8 = "moore8"
    STUDENT_A_FORWARD1 = "studentA_forward1"
    STUDENT_B_FORWARD3 = "studentB_forward3"
    STUDENT_C_FORWARD5 = "studentC_forward5"


class Ignition(Enum):
    LEFT_EDGE_COLUMN = "leftEdgeColumn"
    LEFT_MIDDLE_POINT = "leftMiddlePoint"
    CENTER_POINT = "centerPoint"


class Humidity(Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


HUMIDITY_BASE = {Humidity.LOW: 1.0, Humidity.MEDIUM: 0.7, Humidity.HIGH: 0.4}

_FLAME_SPREADS = {
    Spread.STUDENT_A_FORWARD1: TopologyKind.FORWARD1,
    Spread.STUDENT_B_FORWARD3: TopologyKind.FORWARD3,
    Spread.STUDENT_C_FORWARD5: TopologyKind.FORWARD5,
}


class FireError(ValueError):
    pass


@dataclass(frozen=True)
class Wind:
    direction: float  # degrees, 0 = blowing toward the east
    strength: float   # 0..1

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise FireError(f"wind strength must be in [0, 1], got {self.strength}")


@dataclass(frozen=True)
class FireVariant:
    spread: Spread = Spread.BASELINE4
    ignition: Ignition = Ignition.LEFT_EDGE_COLUMN
    wind: Wind | None = None
    humidity: Humidity = Humidity.LOW
    # moving-flame variants need a heading for each spark; axis-aligned only
    flame_heading: int = 0

    def __post_init__(self):
        if self.flame_heading not in AXIS_HEADINGS:
            raise FireError(f"flame heading must be axis-aligned, got {self.flame_heading}")


@dataclass
class Flame:
    x: int
    y: int
    heading: int


@dataclass
class FireState:
    grid: WorldGrid
    cells: np.ndarray          # Cell codes, int8, indexed [y, x]
    initial_trees: np.ndarray  # bool mask of where trees stood before ignition
    flames: list[Flame] = field(default_factory=list)
    tick: int = 0
    initial_tree_count: int = 0

    @property
    def quiescent(self) -> bool:
        return not self.flames and not bool((self.cells == Cell.BURNING).any())

    def burned_tree_count(self) -> int:
        return int(((self.cells == Cell.BURNED) & self.initial_trees).sum())


@dataclass
class FireStepReport:
    noop: bool
    ignited: list[tuple[int, int]]
    burned_out: list[tuple[int, int]]


@dataclass(frozen=True)
class FireResult:
    percent_burned: float
    ticks_to_quiescence: int


def ignition_cells(grid: WorldGrid, ignition: Ignition) -> list[tuple[int, int]]:
    if ignition is Ignition.LEFT_EDGE_COLUMN:
        return [(0, y) for y in range(grid.height)]
    if ignition is Ignition.LEFT_MIDDLE_POINT:
        return [(0, grid.height // 2)]
    return [(grid.width // 2, grid.height // 2)]


def init_fire(grid: WorldGrid, density: float, variant: FireVariant, rng: Rng) -> FireState:
    """Populate trees by independent Bernoulli draws, then light the sparks.

    Draws are row-major, one per patch, taken as a single batch. Ignition
    cells burn regardless of whether a tree stood there; the tree count is
    recorded before ignition.
    """
    if not 0.0 <= density <= 1.0:
        raise FireError(f"density must be in [0, 1], got {density}")
    draws = rng.next_floats(grid.cell_count).reshape(grid.height, grid.width)
    trees = draws < density
    cells = np.where(trees, np.int8(Cell.TREE), np.int8(Cell.EMPTY))
    state = FireState(
        grid=grid,
        cells=cells,
        initial_trees=trees.copy(),
        initial_tree_count=int(trees.sum()),
    )
    sparks = ignition_cells(grid, variant.ignition)
    for x, y in sparks:
        state.cells[y, x] = Cell.BURNING
    if variant.spread in _FLAME_SPREADS:
        state.flames = [Flame(x, y, variant.flame_heading) for x, y in sparks]
    return state


def ignition_probability(variant: FireVariant, to_neighbor: int) -> float:
    """Chance one burning patch ignites one tree neighbor in one tick.

    base(humidity) scaled by wind alignment: 1 + strength * cos(angle between
    the wind and the direction to the neighbor), clamped to [0, 1]. No wind
    and low humidity give probability 1, the deterministic case.
    """
    p = HUMIDITY_BASE[variant.humidity]
    if variant.wind is not None and variant.wind.strength > 0.0:
        delta = math.radians(variant.wind.direction - to_neighbor)
        p *= 1.0 + variant.wind.strength * math.cos(delta)
    return min(1.0, max(0.0, p))


def _isotropic_offsets(spread: Spread) -> tuple[tuple[int, int], ...]:
    return VON4_OFFSETS if spread is Spread.BASELINE4 else MOORE8_OFFSETS


def _step_isotropic(state: FireState, variant: FireVariant, rng: Rng) -> FireStepReport:
    cells = state.cells
    h, w = cells.shape
    offsets = _isotropic_offsets(variant.spread)
    burning = cells == Cell.BURNING
    probs = [ignition_probability(variant, offset_heading(dx, dy)) for dx, dy in offsets]

    if all(p >= 1.0 for p in probs):
        # deterministic spread: vectorized, consumes no random draws
        reached = np.zeros_like(burning)
        for dx, dy in offsets:
            sy0, sy1 = max(0, -dy), h - max(0, dy)
            sx0, sx1 = max(0, -dx), w - max(0, dx)
            reached[sy0 + dy:sy1 + dy, sx0 + dx:sx1 + dx] |= burning[sy0:sy1, sx0:sx1]
        newly = reached & (cells == Cell.TREE)
        ys, xs = np.nonzero(newly)
        ignited = [(int(x), int(y)) for y, x in zip(ys, xs)]
    else:
        # probabilistic spread: burning patches in row-major order, each
        # attempting its tree neighbors in topology order, one draw per attempt
        ignited = []
        ys, xs = np.nonzero(burning)
        for y, x in zip(ys.tolist(), xs.tolist()):
            for (dx, dy), p in zip(offsets, probs):
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and 0 <= ny < h and cells[ny, nx] == Cell.TREE:
                    if rng.next_float() < p:
                        cells[ny, nx] = Cell.BURNING
                        ignited.append((nx, ny))
        newly = None

    byx, bxx = np.nonzero(burning)
    burned_out = [(int(x), int(y)) for y, x in zip(byx, bxx)]
    cells[burning] = Cell.BURNED
    if newly is not None:
        cells[newly] = Cell.BURNING
    return FireStepReport(noop=False, ignited=ignited, burned_out=burned_out)


def _step_flames(state: FireState, variant: FireVariant) -> FireStepReport:
    cells = state.cells
    grid = state.grid
    ignited: list[tuple[int, int]] = []
    burned_out: list[tuple[int, int]] = []

    if variant.spread is Spread.STUDENT_A_FORWARD1:
        survivors = []
        for fl in state.flames:
            if cells[fl.y, fl.x] == Cell.BURNING:
                cells[fl.y, fl.x] = Cell.BURNED
                burned_out.append((fl.x, fl.y))
            step = forward_offsets(TopologyKind.FORWARD1, fl.heading)[0]
            nx, ny = fl.x + step[0], fl.y + step[1]
            if not grid.in_bounds(nx, ny):
                continue  # flame leaves the world
            if cells[ny, nx] == Cell.TREE:
                cells[ny, nx] = Cell.BURNING
                ignited.append((nx, ny))
            survivors.append(Flame(nx, ny, fl.heading))
        state.flames = survivors
    else:
        kind = _FLAME_SPREADS[variant.spread]
        spawned: list[Flame] = []
        claimed: set[tuple[int, int]] = set()
        for fl in state.flames:
            for dx, dy in forward_offsets(kind, fl.heading):
                nx, ny = fl.x + dx, fl.y + dy
                if grid.in_bounds(nx, ny) and cells[ny, nx] == Cell.TREE and (nx, ny) not in claimed:
                    claimed.add((nx, ny))
                    cells[ny, nx] = Cell.BURNING
                    ignited.append((nx, ny))
                    spawned.append(Flame(nx, ny, fl.heading))
            if cells[fl.y, fl.x] == Cell.BURNING:
                cells[fl.y, fl.x] = Cell.BURNED
                burned_out.append((fl.x, fl.y))
        state.flames = spawned

    return FireStepReport(noop=False, ignited=ignited, burned_out=burned_out)


def step_fire(state: FireState, variant: FireVariant, rng: Rng) -> FireStepReport:
    """Advance the fire one synchronous tick; mutates state in place.

    Stepping a quiescent state changes nothing and is flagged in the report.
    """
    if state.quiescent:
        return FireStepReport(noop=True, ignited=[], burned_out=[])
    if variant.spread in _FLAME_SPREADS:
        report = _step_flames(state, variant)
    else:
        report = _step_isotropic(state, variant, rng)
    state.tick += 1
    return report


def percent_burned(state: FireState) -> float:
    """Burned trees over initial trees; 0 for an empty forest."""
    if state.initial_tree_count == 0:
        return 0.0
    return state.burned_tree_count() / state.initial_tree_count


def default_max_ticks(grid: WorldGrid) -> int:
    # generous bound that terminates every variant
    return 10 * (grid.width + grid.height)


def run_fire(state: FireState, variant: FireVariant, rng: Rng, max_ticks: int | None = None) -> FireResult:
    if max_ticks is None:
        max_ticks = default_max_ticks(state.grid)
    if max_ticks < 1:
        raise FireError(f"max_ticks must be at least 1, got {max_ticks}")
    while not state.quiescent and state.tick < max_ticks:
        step_fire(state, variant, rng)
    return FireResult(percent_burned=percent_burned(state), ticks_to_quiescence=state.tick)

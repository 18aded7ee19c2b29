"""Lattice geometry shared by the micro-worlds: grids, neighborhoods, headings.

Conventions, used everywhere including the wire protocol and the browser UI:

  * positions are (x, y) tuples; x is the column, y is the row, (0, 0) is the
    top-left patch, so "north" means decreasing y
  * headings are degrees: 0 = east, 90 = north, counterclockwise positive
  * neighbor iteration order is fixed and is part of the determinism
    contract: N, E, S, W, then NE, SE, SW, NW; forward topologies list
    front, front-left diagonal, front-right diagonal, left, right
    (for an eastward heading that reads: ahead, upper diagonal, lower
    diagonal, above, below)
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class GridError(ValueError):
    pass


# heading (degrees) -> unit lattice step
DIR_VECTORS: dict[int, tuple[int, int]] = {
    0: (1, 0),
    45: (1, -1),
    90: (0, -1),
    135: (-1, -1),
    180: (-1, 0),
    225: (-1, 1),
    270: (0, 1),
    315: (1, 1),
}

# tie-breaking scan for heading quantization: clockwise starting at north
SCAN_CLOCKWISE_FROM_NORTH: tuple[int, ...] = (90, 45, 0, 315, 270, 225, 180, 135)

VON4_OFFSETS: tuple[tuple[int, int], ...] = ((0, -1), (1, 0), (0, 1), (-1, 0))
MOORE8_OFFSETS: tuple[tuple[int, int], ...] = VON4_OFFSETS + (
    (1, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
)

_OFFSET_ANGLE = {v: k for k, v in DIR_VECTORS.items()}

AXIS_HEADINGS = (0, 90, 180, 270)


class TopologyKind(Enum):
    VON_NEUMANN4 = "vonNeumann4"
    MOORE8 = "moore8"
    FORWARD1 = "forward1"
    FORWARD3 = "forward3"
    FORWARD5 = "forward5"


_FORWARD_KINDS = {TopologyKind.FORWARD1, TopologyKind.FORWARD3, TopologyKind.FORWARD5}


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    dir: int | None = None

    def __post_init__(self):
        if self.kind in _FORWARD_KINDS:
            if self.dir not in AXIS_HEADINGS:
                raise GridError(
                    f"{self.kind.value} requires an axis-aligned heading, got {self.dir}"
                )
        elif self.dir is not None:
            raise GridError(f"{self.kind.value} takes no heading")

    @classmethod
    def von_neumann4(cls) -> "Topology":
        return cls(TopologyKind.VON_NEUMANN4)

    @classmethod
    def moore8(cls) -> "Topology":
        return cls(TopologyKind.MOORE8)

    @classmethod
    def forward(cls, arity: int, direction: int) -> "Topology":
        kind = {
            1: TopologyKind.FORWARD1,
            3: TopologyKind.FORWARD3,
            5: TopologyKind.FORWARD5,
        }[arity]
        return cls(kind, direction)


@dataclass(frozen=True)
class WorldGrid:
    """Bounded (or toroidal) rectangle of patches. Geometry only; the models
    keep their per-patch payloads in arrays of the same shape."""

    width: int
    height: int
    wrap: bool = False

    @property
    def cell_count(self) -> int:
        return self.width * self.height

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height


def new_grid(width: int, height: int, wrap: bool = False) -> WorldGrid:
    if width < 3 or height < 3:
        raise GridError(f"grid must be at least 3x3, got {width}x{height}")
    return WorldGrid(width, height, wrap)


def forward_offsets(kind: TopologyKind, direction: int) -> tuple[tuple[int, int], ...]:
    """Lattice offsets for the moving-flame topologies, in listing order."""
    f = DIR_VECTORS[direction % 360]
    left = DIR_VECTORS[(direction + 90) % 360]
    right = DIR_VECTORS[(direction - 90) % 360]
    if kind is TopologyKind.FORWARD1:
        return (f,)
    fl = (f[0] + left[0], f[1] + left[1])
    fr = (f[0] + right[0], f[1] + right[1])
    if kind is TopologyKind.FORWARD3:
        return (f, fl, fr)
    return (f, fl, fr, left, right)


def topology_offsets(topo: Topology) -> tuple[tuple[int, int], ...]:
    if topo.kind is TopologyKind.VON_NEUMANN4:
        return VON4_OFFSETS
    if topo.kind is TopologyKind.MOORE8:
        return MOORE8_OFFSETS
    return forward_offsets(topo.kind, topo.dir)


def neighbors(grid: WorldGrid, pos: tuple[int, int], topo: Topology) -> list[tuple[int, int]]:
    """In-bounds neighbors of pos under topo, in the documented fixed order.

    Bounded grids clip at the edges; toroidal grids wrap.
    """
    x, y = pos
    if not grid.in_bounds(x, y):
        raise GridError(f"position {pos} outside {grid.width}x{grid.height} grid")
    out = []
    for dx, dy in topology_offsets(topo):
        nx, ny = x + dx, y + dy
        if grid.wrap:
            out.append((nx % grid.width, ny % grid.height))
        elif grid.in_bounds(nx, ny):
            out.append((nx, ny))
    return out


def angular_difference(a: float, b: float) -> float:
    """Smallest absolute angle between two headings, in [0, 180]."""
    return abs((a - b + 180.0) % 360.0 - 180.0)


def quantize_heading(heading: float) -> int:
    """Map a continuous heading onto the nearest of the 8 lattice headings.

    Exact ties break clockwise from north, so 22.5 degrees quantizes to 45.
    """
    r = heading % 360.0
    if r % 45.0 != 22.5:
        return int(45 * round(r / 45.0)) % 360
    # exact tie between two lattice headings
    best = None
    best_d = 361.0
    for angle in SCAN_CLOCKWISE_FROM_NORTH:
        d = angular_difference(r, angle)
        if d < best_d - 1e-12:
            best, best_d = angle, d
    return best


def heading_step(heading: float) -> tuple[int, int]:
    """Unit lattice step closest to a continuous heading."""
    return DIR_VECTORS[quantize_heading(heading)]


def offset_heading(dx: int, dy: int) -> int:
    """Exact heading (multiple of 45) of a unit lattice offset."""
    return _OFFSET_ANGLE[(dx, dy)]


def chebyshev(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def manhattan(a: tuple[int, int], b: tuple[int, int]) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])

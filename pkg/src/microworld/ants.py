"""The ant-colony micro-world: nest, food piles, and ants with pluggable
motion, homing, pheromone-following, and nest-exit policies.

Every tick runs five phases in a fixed order that is part of the replay
contract:

  1. exit     the exit policy lets ants leave the nest
  2. move     non-carrying ants move by the motion rule; any visible
              pheromone interrupts the rule and turns the ant toward the
              chosen patch (first over threshold, or the richest patch)
  3. home     carrying ants climb the nest scent or walk straight after a
              180 turn, and drop pheromone on each patch they leave
  4. exchange ants take one food unit where they stand, and deliver when
              inside the nest radius
  5. fields   pheromone evaporates, then diffuses

Ants are processed in id order within each phase; later ants see earlier
ants' updated positions. Random draws happen only in the wiggle of
random-walk motion (one draw per walking ant per tick) and in the initial
heading assignment, so equal seeds and equal steering schedules replay
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .fields import field_diffuse, field_evaporate, new_field
from .grid import (
    DIR_VECTORS,
    MOORE8_OFFSETS,
    WorldGrid,
    chebyshev,
    offset_heading,
    quantize_heading,
)
from .rng import Rng


class AntsError(ValueError):
    pass


class Motion(Enum):
    RANDOM_WALK = "randomWalk"
    RADIAL_PHEROMONE_INTERRUPT = "radialPheromoneInterrupt"
    RANDOM_UNTIL_CARRIER_MET = "randomUntilCarrierMet"


class Homing(Enum):
    NEST_SCENT_GRADIENT = "nestScentGradient"
    TURN_180 = "turn180"


class Following(Enum):
    THRESHOLD_TURN = "thresholdTurn"
    ACCUMULATE_MAX = "accumulateMax"


class ExitPolicy(Enum):
    IMMEDIATE = "immediate"
    GATED_ON_FIRST_RETURN = "gatedOnFirstReturn"
    REVERSE_REENTRY = "reverseReentry"


@dataclass(frozen=True)
class AntsVariant:
    motion: Motion = Motion.RANDOM_WALK
    homing: Homing = Homing.NEST_SCENT_GRADIENT
    following: Following = Following.THRESHOLD_TURN
    exit_policy: ExitPolicy = ExitPolicy.IMMEDIATE


@dataclass(frozen=True)
class AntsParams:
    wiggle: float = 40.0             # max random turn per tick, degrees
    drop_amount: float = 60.0        # pheromone left per carrying step
    evaporation_rate: float = 0.1    # per tick
    diffusion_share: float = 0.5     # per tick
    visibility_threshold: float = 0.05  # level at which a patch reads as marked

    def __post_init__(self):
        if self.wiggle < 0 or self.drop_amount < 0 or self.visibility_threshold < 0:
            raise AntsError("wiggle, drop_amount and visibility_threshold must be non-negative")
        if not 0.0 <= self.evaporation_rate <= 1.0:
            raise AntsError(f"evaporation_rate must be in [0, 1], got {self.evaporation_rate}")
        if not 0.0 <= self.diffusion_share <= 1.0:
            raise AntsError(f"diffusion_share must be in [0, 1], got {self.diffusion_share}")


@dataclass
class AntAgent:
    id: int
    x: int
    y: int
    heading: float
    carrying: bool = False
    in_nest: bool = True
    exit_heading: float = 0.0
    entry_heading: float = 0.0
    returned: bool = False      # has delivered at least once
    met_carrier: bool = False   # randomUntilCarrierMet: locked onto a carrier's back-trail
    halted: bool = False        # steering "stop" is sticky until "go" or a move command


@dataclass
class AntsState:
    grid: WorldGrid
    nest_pos: tuple[int, int]
    nest_radius: int
    food: dict[tuple[int, int], int]
    pheromone: np.ndarray
    nest_scent: np.ndarray
    ants: list[AntAgent]
    initial_food: int
    delivered: int = 0
    tick: int = 0
    first_return_seen: bool = False
    first_return_heading: float = 0.0
    scout_id: int = 0
    pheromone_total: float = 0.0


@dataclass
class AntsStepReport:
    noop: bool
    # ("exit", ant_id, heading) | ("pickup", ant_id, (x, y))
    # | ("delivery", ant_id, entry_heading) | ("met_carrier", ant_id, carrier_id)
    events: list[tuple] = field(default_factory=list)


@dataclass(frozen=True)
class AntsRunResult:
    delivered: int
    ticks: int
    trail_snapshot: np.ndarray
    events: list[tuple[int, tuple]]


def nest_scent_field(grid: WorldGrid, nest_pos: tuple[int, int]) -> np.ndarray:
    """Static homing field 1 / (1 + chebyshev distance to the nest)."""
    ys, xs = np.indices((grid.height, grid.width))
    d = np.maximum(np.abs(xs - nest_pos[0]), np.abs(ys - nest_pos[1]))
    return 1.0 / (1.0 + d)


def init_ants(
    grid: WorldGrid,
    n_ants: int,
    food_layout: list[dict],
    nest_pos: tuple[int, int],
    variant: AntsVariant,
    params: AntsParams,
    rng: Rng,
    nest_radius: int = 2,
) -> AntsState:
    """All ants start inside the nest with random headings (one draw each,
    in id order). Food piles must lie outside the nest radius."""
    if n_ants < 1:
        raise AntsError(f"need at least one ant, got {n_ants}")
    if not grid.in_bounds(*nest_pos):
        raise AntsError(f"nest {nest_pos} outside the grid")
    food: dict[tuple[int, int], int] = {}
    for pile in food_layout:
        pos = tuple(pile["pos"])
        amount = int(pile["amount"])
        if amount < 1:
            raise AntsError(f"food amount must be at least 1, got {amount} at {pos}")
        if not grid.in_bounds(*pos):
            raise AntsError(f"food pile {pos} outside the grid")
        if chebyshev(pos, nest_pos) <= nest_radius:
            raise AntsError(f"food pile {pos} inside the nest radius")
        food[pos] = food.get(pos, 0) + amount
    ants = [
        AntAgent(id=i, x=nest_pos[0], y=nest_pos[1], heading=rng.uniform(0.0, 360.0))
        for i in range(n_ants)
    ]
    return AntsState(
        grid=grid,
        nest_pos=nest_pos,
        nest_radius=nest_radius,
        food=food,
        pheromone=new_field(grid),
        nest_scent=nest_scent_field(grid, nest_pos),
        ants=ants,
        initial_food=sum(food.values()),
    )


def nest_scent_at(state: AntsState, pos: tuple[int, int]) -> float:
    x, y = pos
    if not state.grid.in_bounds(x, y):
        raise AntsError(f"position {pos} outside the grid")
    return float(state.nest_scent[y, x])


def pick_pheromone_target(levels: list[float], following: Following, threshold: float) -> int | None:
    """Index of the neighbor patch to turn toward, or None if none is visible.

    levels follow the documented neighbor order (N, E, S, W, NE, SE, SW, NW).
    thresholdTurn takes the first patch at or above the threshold;
    accumulateMax takes the richest visible patch, first-in-order on ties.
    """
    if following is Following.ACCUMULATE_MAX:
        best = None
        best_level = -1.0
        for i, lvl in enumerate(levels):
            if lvl >= threshold and lvl > best_level:
                best, best_level = i, lvl
        return best
    for i, lvl in enumerate(levels):
        if lvl >= threshold:
            return i
    return None


def _reflect_heading(heading: float, hit_x: bool, hit_y: bool) -> float:
    if hit_x:
        heading = (180.0 - heading) % 360.0
    if hit_y:
        heading = (-heading) % 360.0
    return heading


def _advance(state: AntsState, ant: AntAgent, heading: float) -> bool:
    """Move one patch toward heading; at a wall the ant stays and its
    heading reflects off the blocked axis. Returns whether it moved."""
    dx, dy = DIR_VECTORS[quantize_heading(heading)]
    nx, ny = ant.x + dx, ant.y + dy
    grid = state.grid
    if grid.in_bounds(nx, ny):
        ant.x, ant.y = nx, ny
        return True
    hit_x = not 0 <= nx < grid.width
    hit_y = not 0 <= ny < grid.height
    ant.heading = _reflect_heading(heading, hit_x, hit_y)
    return False


def _neighbor_toward(state: AntsState, ant: AntAgent, idx: int) -> None:
    dx, dy = MOORE8_OFFSETS[idx]
    ant.heading = float(offset_heading(dx, dy))


def _visible_neighbor_levels(state: AntsState, x: int, y: int) -> list[float]:
    pher = state.pheromone
    grid = state.grid
    out = []
    for dx, dy in MOORE8_OFFSETS:
        nx, ny = x + dx, y + dy
        out.append(float(pher[ny, nx]) if grid.in_bounds(nx, ny) else -1.0)
    return out


def _adjacent_carrier(state: AntsState, ant: AntAgent) -> AntAgent | None:
    """Lowest-id carrying ant on one of the eight neighboring patches."""
    best = None
    for other in state.ants:
        if other.id == ant.id or not other.carrying or other.in_nest:
            continue
        if chebyshev((other.x, other.y), (ant.x, ant.y)) == 1:
            if best is None or other.id < best.id:
                best = other
    return best


def _home_move(state: AntsState, ant: AntAgent, variant: AntsVariant) -> bool:
    if variant.homing is Homing.NEST_SCENT_GRADIENT:
        scent = state.nest_scent
        grid = state.grid
        best_idx = None
        best_val = -1.0
        for i, (dx, dy) in enumerate(MOORE8_OFFSETS):
            nx, ny = ant.x + dx, ant.y + dy
            if grid.in_bounds(nx, ny):
                v = scent[ny, nx]
                if v > best_val:
                    best_idx, best_val = i, v
        if best_idx is None:
            return False
        dx, dy = MOORE8_OFFSETS[best_idx]
        ant.heading = float(offset_heading(dx, dy))
        ant.x += dx
        ant.y += dy
        return True
    # turn180: the heading was flipped at pickup; just walk straight
    return _advance(state, ant, ant.heading)


def step_ants(
    state: AntsState,
    variant: AntsVariant,
    params: AntsParams,
    rng: Rng,
    steering: dict[int, dict] | None = None,
) -> AntsStepReport:
    """One synchronous tick; mutates state in place.

    steering maps ant id to one command for this tick: a commanded heading
    replaces the motion rule, "stop" holds the ant in place until "go" or a
    movement command, while pickup, delivery, and deposits run unchanged.
    """
    events: list[tuple] = []
    gated = variant.exit_policy is ExitPolicy.GATED_ON_FIRST_RETURN
    reverse = variant.exit_policy is ExitPolicy.REVERSE_REENTRY
    steering = steering or {}

    # phase 1: exits
    for ant in state.ants:
        if not ant.in_nest:
            continue
        if gated and not state.first_return_seen and ant.id != state.scout_id:
            continue
        ant.in_nest = False
        if gated and state.first_return_seen:
            ant.heading = state.first_return_heading
        elif reverse and ant.returned:
            ant.heading = (ant.entry_heading + 180.0) % 360.0
        ant.exit_heading = ant.heading
        events.append(("exit", ant.id, ant.heading))

    # phases 2+3: movement. Interrupt checks read the field as it stood at
    # the start of the tick, so deposits are collected and applied afterward.
    check_pheromone = state.pheromone_total >= params.visibility_threshold
    deposits: list[tuple[int, int]] = []
    for ant in state.ants:
        if ant.in_nest:
            continue
        cmd = steering.get(ant.id)
        from_pos = (ant.x, ant.y)
        moved = False
        if cmd is not None:
            kind = cmd.get("kind")
            if kind == "stop":
                ant.halted = True
            else:
                ant.halted = False
                if kind == "set_heading":
                    ant.heading = float(cmd["degrees"]) % 360.0
                    moved = _advance(state, ant, ant.heading)
                elif kind == "turn_left":
                    ant.heading = (ant.heading + 45.0) % 360.0
                    moved = _advance(state, ant, ant.heading)
                elif kind == "turn_right":
                    ant.heading = (ant.heading - 45.0) % 360.0
                    moved = _advance(state, ant, ant.heading)
                elif kind == "go":
                    moved = _autonomous_move(state, ant, variant, params, rng, check_pheromone, events)
                else:
                    raise AntsError(f"unknown steering action {kind!r}")
        elif ant.halted:
            pass
        else:
            moved = _autonomous_move(state, ant, variant, params, rng, check_pheromone, events)
        if moved and ant.carrying:
            deposits.append(from_pos)
    for x, y in deposits:
        state.pheromone[y, x] += params.drop_amount

    # phase 4: pickup and delivery
    for ant in state.ants:
        if ant.in_nest:
            continue
        pos = (ant.x, ant.y)
        if not ant.carrying and state.food.get(pos, 0) > 0:
            state.food[pos] -= 1
            if state.food[pos] == 0:
                del state.food[pos]
            ant.carrying = True
            if variant.homing is Homing.TURN_180:
                ant.heading = (ant.heading + 180.0) % 360.0
            events.append(("pickup", ant.id, pos))
        if ant.carrying and chebyshev(pos, state.nest_pos) <= state.nest_radius:
            ant.carrying = False
            ant.in_nest = True
            ant.entry_heading = ant.heading
            ant.returned = True
            state.delivered += 1
            if not state.first_return_seen:
                state.first_return_seen = True
                # outbound direction of the first successful forager
                state.first_return_heading = (ant.heading + 180.0) % 360.0
            events.append(("delivery", ant.id, ant.entry_heading))

    # phase 5: pheromone field update (skipped while the field is all zero,
    # which changes nothing; totals far below every tolerance are zeroed)
    if state.pheromone_total > 0.0 or deposits:
        field_evaporate(state.pheromone, params.evaporation_rate, out=state.pheromone)
        field_diffuse(state.pheromone, params.diffusion_share, out=state.pheromone)
        total = float(state.pheromone.sum())
        if total < 1e-12:
            state.pheromone[:] = 0.0
            total = 0.0
        state.pheromone_total = total

    state.tick += 1
    return AntsStepReport(noop=False, events=events)


def _autonomous_move(
    state: AntsState,
    ant: AntAgent,
    variant: AntsVariant,
    params: AntsParams,
    rng: Rng,
    check_pheromone: bool,
    events: list[tuple],
) -> bool:
    if ant.carrying:
        return _home_move(state, ant, variant)

    motion = variant.motion
    if motion is Motion.RANDOM_WALK or (
        motion is Motion.RANDOM_UNTIL_CARRIER_MET and not ant.met_carrier
    ):
        ant.heading = (ant.heading + rng.uniform(-params.wiggle, params.wiggle)) % 360.0
    if motion is Motion.RANDOM_UNTIL_CARRIER_MET:
        carrier = _adjacent_carrier(state, ant)
        if carrier is not None:
            ant.heading = (carrier.heading + 180.0) % 360.0
            ant.met_carrier = True
            events.append(("met_carrier", ant.id, carrier.id))
    # any visible pheromone interrupts the motion rule
    if check_pheromone:
        levels = _visible_neighbor_levels(state, ant.x, ant.y)
        idx = pick_pheromone_target(levels, variant.following, params.visibility_threshold)
        if idx is not None:
            _neighbor_toward(state, ant, idx)
    return _advance(state, ant, ant.heading)


def food_census(state: AntsState) -> dict[str, int]:
    """Exact conservation audit: piles + carried + delivered = initial food."""
    return {
        "in_piles": sum(state.food.values()),
        "carried": sum(1 for a in state.ants if a.carrying),
        "delivered": state.delivered,
    }


def run_ants(
    state: AntsState,
    variant: AntsVariant,
    params: AntsParams,
    rng: Rng,
    max_ticks: int,
) -> AntsRunResult:
    """Step until every food unit is delivered or max_ticks elapse."""
    if max_ticks < 1:
        raise AntsError(f"max_ticks must be at least 1, got {max_ticks}")
    log: list[tuple[int, tuple]] = []
    while state.delivered < state.initial_food and state.tick < max_ticks:
        report = step_ants(state, variant, params, rng)
        for ev in report.events:
            log.append((state.tick, ev))
    return AntsRunResult(
        delivered=state.delivered,
        ticks=state.tick,
        trail_snapshot=state.pheromone.copy(),
        events=log,
    )

"""Deterministic valet-parking MDP on an 8-connected obstacle grid.

The vehicle starts at an initial cell, must visit each user's pickup cell
before their dropoff cell, and the episode terminates when every user is
served and the vehicle stands on the car-park cell.  Moves that would
leave the grid or enter an obstacle are "blocked": the vehicle stays in
place and collects a penalty, the episode continues.

All operations here are pure functions over value types; nothing is
mutated in place.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

Cell = tuple[int, int]

SQRT2 = math.sqrt(2.0)


class GridWorldError(Exception):
    """Base class for environment errors."""


class SpotOutOfBounds(GridWorldError):
    pass


class SpotOnObstacle(GridWorldError):
    pass


class DuplicateSpot(GridWorldError):
    pass


class EmptyUserList(GridWorldError):
    pass


class NonAdjacentCells(GridWorldError):
    pass


class EpisodeAlreadyDone(GridWorldError):
    pass


class Action(Enum):
    """Eight move directions. UP decreases X, LEFT decreases Y."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    TOP_LEFT = 4
    TOP_RIGHT = 5
    BOTTOM_LEFT = 6
    BOTTOM_RIGHT = 7

    @property
    def delta(self) -> Cell:
        return ACTION_DELTAS[self.value]


ACTION_DELTAS: tuple[Cell, ...] = (
    (-1, 0),   # UP
    (1, 0),    # DOWN
    (0, -1),   # LEFT
    (0, 1),    # RIGHT
    (-1, -1),  # TOP_LEFT
    (-1, 1),   # TOP_RIGHT
    (1, -1),   # BOTTOM_LEFT
    (1, 1),    # BOTTOM_RIGHT
)

# delta -> action index, for reconstructing the action along a stored path
DELTA_TO_ACTION: dict[Cell, int] = {d: i for i, d in enumerate(ACTION_DELTAS)}


@dataclass(frozen=True)
class GridMap:
    """Grid dimensions plus the set of obstacle cells."""

    width_x: int
    width_y: int
    obstacles: frozenset[Cell] = field(default_factory=frozenset)

    def __post_init__(self):
        for cell in self.obstacles:
            if not self.in_bounds(cell):
                raise SpotOutOfBounds(f"obstacle {cell} outside {self.width_x}x{self.width_y} grid")

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width_x and 0 <= y < self.width_y

    def passable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.obstacles


@dataclass(frozen=True)
class Scenario:
    """Initial cell, N pickups, N dropoffs and the car-park cell."""

    initial: Cell
    pickups: tuple[Cell, ...]
    dropoffs: tuple[Cell, ...]
    car_park: Cell

    @property
    def n_users(self) -> int:
        return len(self.pickups)

    @property
    def spots(self) -> tuple[Cell, ...]:
        """Canonical spot order: initial, pickups 1..N, dropoffs 1..N, car park."""
        return (self.initial, *self.pickups, *self.dropoffs, self.car_park)


class Event(NamedTuple):
    kind: str  # "pickup" | "dropoff"
    user: int  # 0-based user index


@dataclass(frozen=True)
class EpisodeState:
    position: Cell
    statuses: tuple[int, ...]  # per user: 0 untouched, 1 picked up, 2 dropped off
    step: int = 0
    traveled: float = 0.0


@dataclass(frozen=True)
class StepOutcome:
    next_state: EpisodeState
    reward: float
    done: bool
    blocked: bool
    events: tuple[Event, ...] = ()


def validate_scenario(grid: GridMap, scenario: Scenario) -> Scenario:
    """Check that all 2N+2 spots are in bounds, off obstacles and distinct."""
    if len(scenario.pickups) == 0:
        raise EmptyUserList("scenario needs at least one user")
    if len(scenario.pickups) != len(scenario.dropoffs):
        raise EmptyUserList(
            f"{len(scenario.pickups)} pickups but {len(scenario.dropoffs)} dropoffs"
        )
    seen: set[Cell] = set()
    for name, cell in _named_spots(scenario):
        if not grid.in_bounds(cell):
            raise SpotOutOfBounds(f"{name} at {list(cell)} outside {grid.width_x}x{grid.width_y} grid")
        if cell in grid.obstacles:
            raise SpotOnObstacle(f"{name} at {list(cell)} sits on an obstacle")
        if cell in seen:
            raise DuplicateSpot(f"{name} at {list(cell)} duplicates another spot")
        seen.add(cell)
    return scenario


def _named_spots(scenario: Scenario):
    yield "initial", scenario.initial
    for n, cell in enumerate(scenario.pickups):
        yield f"pickup {n + 1}", cell
    for n, cell in enumerate(scenario.dropoffs):
        yield f"dropoff {n + 1}", cell
    yield "car_park", scenario.car_park


def reset(scenario: Scenario) -> EpisodeState:
    return EpisodeState(
        position=scenario.initial,
        statuses=(0,) * scenario.n_users,
        step=0,
        traveled=0.0,
    )


def apply_action(state: EpisodeState, action: Action, grid: GridMap) -> tuple[Cell, bool]:
    """Candidate move; blocked moves return the original cell."""
    dx, dy = action.delta
    candidate = (state.position[0] + dx, state.position[1] + dy)
    if not grid.passable(candidate):
        return state.position, True
    return candidate, False


def step_distance(prev: Cell, nxt: Cell) -> float:
    """Euclidean length of one grid step: 0, 1 or sqrt(2)."""
    dx = abs(prev[0] - nxt[0])
    dy = abs(prev[1] - nxt[1])
    if dx > 1 or dy > 1:
        raise NonAdjacentCells(f"{prev} and {nxt} are not 8-adjacent")
    if dx and dy:
        return SQRT2
    return float(dx or dy)


def update_serving(state: EpisodeState, scenario: Scenario) -> tuple[tuple[int, ...], tuple[Event, ...]]:
    """Advance serving statuses given the already-updated position.

    A dropoff only counts once its user has been picked up on an earlier
    step; visiting the dropoff first changes nothing.
    """
    statuses = list(state.statuses)
    events: list[Event] = []
    pos = state.position
    for n in range(scenario.n_users):
        if statuses[n] == 0 and pos == scenario.pickups[n]:
            statuses[n] = 1
            events.append(Event("pickup", n))
        elif statuses[n] == 1 and pos == scenario.dropoffs[n]:
            statuses[n] = 2
            events.append(Event("dropoff", n))
    return tuple(statuses), tuple(events)


def is_terminal(state: EpisodeState, scenario: Scenario) -> bool:
    return (
        state.position == scenario.car_park
        and all(u == 2 for u in state.statuses)
    )


def reward(blocked: bool, events: tuple[Event, ...], terminal: bool, dist: float, p: float) -> float:
    """Single-step reward; exactly one branch fires, in priority order
    blocked > terminal > dropoff > pickup > distance."""
    if blocked:
        return -p
    if terminal:
        return 10.0 * p
    for ev in events:
        if ev.kind == "dropoff":
            return 4.0 * p
    for ev in events:
        if ev.kind == "pickup":
            return 2.0 * p
    return -dist


def step(
    state: EpisodeState,
    action: Action,
    scenario: Scenario,
    grid: GridMap,
    p: float = 10.0,
) -> StepOutcome:
    """One full environment transition."""
    if is_terminal(state, scenario):
        raise EpisodeAlreadyDone("step() called on a terminal state")
    new_pos, blocked = apply_action(state, action, grid)
    dist = step_distance(state.position, new_pos)
    moved = EpisodeState(
        position=new_pos,
        statuses=state.statuses,
        step=state.step + 1,
        traveled=state.traveled + dist,
    )
    statuses, events = update_serving(moved, scenario)
    next_state = EpisodeState(
        position=moved.position,
        statuses=statuses,
        step=moved.step,
        traveled=moved.traveled,
    )
    done = is_terminal(next_state, scenario)
    r = reward(blocked, events, done, dist, p)
    return StepOutcome(next_state=next_state, reward=r, done=done, blocked=blocked, events=events)

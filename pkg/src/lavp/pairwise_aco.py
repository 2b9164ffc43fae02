"""Ant-colony shortest-path search between every pair of key cells.

The first layer of the double-layer solver: for each unordered pair of
the 2N+2 spots, a fresh ant colony searches the obstacle grid and the
best distance found goes into a symmetric (2N+2)x(2N+2) matrix, together
with the winning cell path.

Pheromone lives on directed 8-neighbor edges and is deposited in both
directions (grid movement is undirected).  Ants keep a visited set and
die at dead ends, so every returned path is cycle-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from lavp.gridworld import (
    ACTION_DELTAS,
    DELTA_TO_ACTION,
    Cell,
    GridMap,
    Scenario,
    SQRT2,
)

STEP_COSTS = tuple(SQRT2 if dx and dy else 1.0 for dx, dy in ACTION_DELTAS)


class DeadEnd(Exception):
    """Raised when an ant has no unvisited, passable neighbor."""


class Unreachable(Exception):
    """No ant ever connected the pair across the full iteration budget."""

    def __init__(self, start: Cell, goal: Cell):
        super().__init__(f"no path found from {start} to {goal}")
        self.start = start
        self.goal = goal


@dataclass
class AcoGridConfig:
    alpha: float = 1.1
    beta: float = 12.0
    rho: float = 0.5
    mu: float = 10.0
    iterations: int = 10
    ants: int = 20
    step_cap: int = 100
    tau0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0,1), got {self.rho}")
        if self.iterations < 1 or self.ants < 1 or self.step_cap < 1:
            raise ValueError("iterations, ants and step_cap must all be >= 1")
        if self.tau0 <= 0.0:
            raise ValueError("tau0 must be positive")


class PheromoneGrid:
    """Per-directed-edge pheromone, stored as a (X, Y, 8) array.

    levels[x, y, a] is the pheromone on the edge leaving (x, y) along
    action a.
    """

    def __init__(self, grid: GridMap, tau0: float = 1.0):
        self.levels = np.full((grid.width_x, grid.width_y, 8), tau0)

    def evaporate(self, rho: float) -> None:
        self.levels *= 1.0 - rho

    def deposit_edge(self, v: Cell, w: Cell, amount: float) -> None:
        """Symmetric deposit on both directions of the (v, w) edge."""
        d = (w[0] - v[0], w[1] - v[1])
        a = DELTA_TO_ACTION[d]
        self.levels[v[0], v[1], a] += amount
        back = DELTA_TO_ACTION[(-d[0], -d[1])]
        self.levels[w[0], w[1], back] += amount


@dataclass
class AntPath:
    cells: list[Cell]
    length: float
    success: bool


def heuristic_attractiveness(w: Cell, goal: Cell) -> float:
    """1 / (euclidean distance to goal + 1); maximal (= 1) at the goal."""
    return 1.0 / (math.hypot(w[0] - goal[0], w[1] - goal[1]) + 1.0)


def move_probabilities(
    v: Cell,
    visited: set[Cell],
    pheromone: PheromoneGrid,
    goal: Cell,
    grid: GridMap,
    cfg: AcoGridConfig,
) -> tuple[list[Cell], list[float]]:
    """Sampling distribution over allowed neighbors of v.

    Allowed = in bounds, not an obstacle, not yet visited.  Probability
    is proportional to tau^alpha * eta^beta.
    """
    vx, vy = v
    levels = pheromone.levels
    cells: list[Cell] = []
    weights: list[float] = []
    total = 0.0
    for a, (dx, dy) in enumerate(ACTION_DELTAS):
        w = (vx + dx, vy + dy)
        if w in visited or not grid.passable(w):
            continue
        eta = 1.0 / (math.hypot(w[0] - goal[0], w[1] - goal[1]) + 1.0)
        weight = levels[vx, vy, a] ** cfg.alpha * eta ** cfg.beta
        cells.append(w)
        weights.append(weight)
        total += weight
    if not cells:
        raise DeadEnd(f"no allowed move from {v}")
    return cells, [wt / total for wt in weights]


def run_ant(
    start: Cell,
    goal: Cell,
    pheromone: PheromoneGrid,
    grid: GridMap,
    cfg: AcoGridConfig,
    rng: np.random.Generator,
) -> AntPath:
    """Walk one ant from start toward goal, sampling move_probabilities."""
    pos = start
    path = [start]
    visited = {start}
    length = 0.0
    for _ in range(cfg.step_cap):
        if pos == goal:
            break
        try:
            cells, probs = move_probabilities(pos, visited, pheromone, goal, grid, cfg)
        except DeadEnd:
            break
        # inverse-CDF draw; cheaper than rng.choice for tiny supports
        u = rng.random()
        acc = 0.0
        nxt = cells[-1]
        for cell, prob in zip(cells, probs):
            acc += prob
            if u < acc:
                nxt = cell
                break
        length += SQRT2 if (nxt[0] != pos[0] and nxt[1] != pos[1]) else 1.0
        pos = nxt
        path.append(pos)
        visited.add(pos)
    return AntPath(cells=path, length=length, success=pos == goal)


def deposit_pheromone(
    pheromone: PheromoneGrid,
    successful: list[AntPath],
    cfg: AcoGridConfig,
) -> PheromoneGrid:
    """One per-iteration update: evaporate everywhere, then deposit
    mu / path_length on every edge of every successful ant."""
    pheromone.evaporate(cfg.rho)
    for ant in successful:
        if ant.length <= 0.0:
            continue
        amount = cfg.mu / ant.length
        for v, w in zip(ant.cells, ant.cells[1:]):
            pheromone.deposit_edge(v, w, amount)
    return pheromone


def solve_pair(
    i: Cell,
    j: Cell,
    grid: GridMap,
    cfg: AcoGridConfig,
    rng: np.random.Generator,
) -> tuple[float, list[Cell]]:
    """Best distance and cell path between two spots over the full ant budget."""
    if i == j:
        return 0.0, [i]
    pheromone = PheromoneGrid(grid, cfg.tau0)
    best_length = math.inf
    best_path: list[Cell] | None = None
    for _ in range(cfg.iterations):
        successful: list[AntPath] = []
        for _ in range(cfg.ants):
            ant = run_ant(i, j, pheromone, grid, cfg, rng)
            if ant.success:
                successful.append(ant)
                if ant.length < best_length:
                    best_length = ant.length
                    best_path = ant.cells
        deposit_pheromone(pheromone, successful, cfg)
    if best_path is None:
        raise Unreachable(i, j)
    return best_length, best_path


@dataclass
class PairwiseResult:
    """Symmetric spot-to-spot distance matrix with the best path per pair.

    Spot order: index 0 = initial, 1..N = pickups, N+1..2N = dropoffs,
    2N+1 = car park.
    """

    distances: np.ndarray
    paths: dict[tuple[int, int], list[Cell]] = field(default_factory=dict)
    spot_list: list[Cell] = field(default_factory=list)

    @property
    def n_spots(self) -> int:
        return len(self.spot_list)


def build_distance_matrix(
    scenario: Scenario,
    grid: GridMap,
    cfg: AcoGridConfig,
    rng: np.random.Generator,
) -> PairwiseResult:
    """Solve every unordered pair once and mirror the result."""
    spots = list(scenario.spots)
    m = len(spots)
    distances = np.zeros((m, m))
    paths: dict[tuple[int, int], list[Cell]] = {}
    for a in range(m):
        paths[(a, a)] = [spots[a]]
        for b in range(a + 1, m):
            try:
                length, path = solve_pair(spots[a], spots[b], grid, cfg, rng)
            except Unreachable as exc:
                raise Unreachable(spots[a], spots[b]) from exc
            distances[a, b] = distances[b, a] = length
            paths[(a, b)] = path
            paths[(b, a)] = path[::-1]
    return PairwiseResult(distances=distances, paths=paths, spot_list=spots)


def path_length(cells: list[Cell]) -> float:
    """Recompute the octile length of a stored cell path."""
    total = 0.0
    for v, w in zip(cells, cells[1:]):
        dx = abs(v[0] - w[0])
        dy = abs(v[1] - w[1])
        if dx > 1 or dy > 1:
            raise ValueError(f"path cells {v} and {w} are not adjacent")
        total += SQRT2 if (dx and dy) else float(dx or dy)
    return total

"""Exact references and the random baseline.

Dijkstra on the 8-connected grid, exhaustive enumeration of
precedence-feasible visiting orders, and best-of-T random rollouts.
These are the independent checks the two solvers are measured against.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from lavp import gridworld
from lavp.gridworld import ACTION_DELTAS, Action, Cell, GridMap, Scenario, SQRT2
from lavp.pairwise_aco import PairwiseResult


class Unreachable(Exception):
    pass


class TooManyUsers(Exception):
    pass


@dataclass
class OracleResult:
    distance: float
    path: list[Cell] | None = None
    order: tuple[int, ...] | None = None
    node_expansions: int = 0
    failures: int = 0


def octile_distance(a: Cell, b: Cell) -> float:
    """Closed-form 8-connected distance on an obstacle-free grid."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def grid_shortest_path(grid: GridMap, a: Cell, b: Cell) -> OracleResult:
    """Dijkstra with cardinal cost 1 and diagonal cost sqrt(2)."""
    if not grid.passable(a) or not grid.passable(b):
        raise Unreachable(f"{a} or {b} is not a passable cell")
    # flat-array bookkeeping keyed by x * width_y + y
    wy = grid.width_y
    wx_max = grid.width_x
    obstacles = grid.obstacles
    n_cells = wx_max * wy
    dist = [math.inf] * n_cells
    prev: list[int] = [-1] * n_cells
    start, goal = a[0] * wy + a[1], b[0] * wy + b[1]
    dist[start] = 0.0
    heap: list[tuple[float, int]] = [(0.0, start)]
    expansions = 0
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        expansions += 1
        if v == goal:
            indices = [v]
            while indices[-1] != start:
                indices.append(prev[indices[-1]])
            indices.reverse()
            path = [(k // wy, k % wy) for k in indices]
            return OracleResult(distance=d, path=path, node_expansions=expansions)
        vx, vy = divmod(v, wy)
        for dx, dy in ACTION_DELTAS:
            nx, ny = vx + dx, vy + dy
            if not (0 <= nx < wx_max and 0 <= ny < wy) or (nx, ny) in obstacles:
                continue
            nd = d + (SQRT2 if dx and dy else 1.0)
            wi = nx * wy + ny
            if nd < dist[wi]:
                dist[wi] = nd
                prev[wi] = v
                heapq.heappush(heap, (nd, wi))
    raise Unreachable(f"no path from {a} to {b}")


def feasible_orders(n_users: int):
    """Yield every valid visiting order: 0, a permutation of pickups and
    dropoffs with each pickup first, then 2N+1."""
    middle = range(1, 2 * n_users + 1)
    for perm in itertools.permutations(middle):
        position = {spot: idx for idx, spot in enumerate(perm)}
        if all(position[n] < position[n + n_users] for n in range(1, n_users + 1)):
            yield (0, *perm, 2 * n_users + 1)


def enumerate_optimal_order(dm: PairwiseResult, n_users: int) -> OracleResult:
    """Exact minimum-distance valid order by exhaustive enumeration."""
    if n_users > 6:
        raise TooManyUsers(f"{n_users} users: (2N)!/2^N orders is too many to enumerate")
    best_order = None
    best_length = math.inf
    count = 0
    for order in feasible_orders(n_users):
        count += 1
        length = sum(dm.distances[i, j] for i, j in zip(order, order[1:]))
        if length < best_length:
            best_length = length
            best_order = order
    return OracleResult(distance=float(best_length), order=best_order, node_expansions=count)


def random_rollout_best(
    scenario: Scenario,
    grid: GridMap,
    trials: int,
    step_cap: int,
    rng: np.random.Generator,
) -> OracleResult:
    """Best successful episode out of `trials` uniformly-random rollouts.

    Each step picks uniformly among the currently unblocked actions;
    episodes that miss termination within step_cap count as failures.
    All-failure runs report infinite distance.
    """
    best = math.inf
    best_path: list[Cell] | None = None
    failures = 0
    for _ in range(trials):
        state = gridworld.reset(scenario)
        path = [state.position]
        done = False
        for _ in range(step_cap):
            x, y = state.position
            unblocked = [
                a
                for a, (dx, dy) in enumerate(ACTION_DELTAS)
                if grid.passable((x + dx, y + dy))
            ]
            if not unblocked:
                break
            action = unblocked[rng.integers(len(unblocked))]
            outcome = gridworld.step(state, Action(action), scenario, grid)
            state = outcome.next_state
            path.append(state.position)
            if outcome.done:
                done = True
                break
        if done and state.traveled < best:
            best = state.traveled
            best_path = path
        if not done:
            failures += 1
    return OracleResult(distance=best, path=best_path, failures=failures)


def optimal_total_distance(scenario: Scenario, grid: GridMap) -> tuple[float, tuple[int, ...]]:
    """Exact problem optimum: Dijkstra distances between all spots, then
    exhaustive order enumeration."""
    spots = list(scenario.spots)
    m = len(spots)
    distances = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            d = grid_shortest_path(grid, spots[i], spots[j]).distance
            distances[i, j] = distances[j, i] = d
    dm = PairwiseResult(distances=distances, paths={}, spot_list=spots)
    result = enumerate_optimal_order(dm, scenario.n_users)
    return result.distance, result.order

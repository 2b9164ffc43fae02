"""Ant-colony search over the spot visiting order with pickup precedence.

The second layer of the double-layer solver: given the pairwise distance
matrix, ants build tours that start at the initial spot, visit every
pickup before its dropoff, and end at the car park.  Feasibility is
enforced while sampling (the allowed set never contains a dropoff whose
pickup is pending, and the car park only when nothing else remains), so
every sampled tour is valid by construction.

Pheromone deposit is elitist: only a tour that strictly improves the
incumbent best updates the matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lavp.pairwise_aco import PairwiseResult


class MissingPairPath(Exception):
    pass


@dataclass
class OrderAcoConfig:
    alpha: float = 1.1
    beta: float = 12.0
    rho: float = 0.5
    mu: float = 10.0
    iterations: int = 50
    ants: int = 20
    tau0: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0,1), got {self.rho}")
        if self.iterations < 1 or self.ants < 1:
            raise ValueError("iterations and ants must be >= 1")


@dataclass(frozen=True)
class Tour:
    order: tuple[int, ...]  # spot indices, starts at 0, ends at 2N+1
    length: float


def tour_length(order: tuple[int, ...] | list[int], distances: np.ndarray) -> float:
    return float(sum(distances[a, b] for a, b in zip(order, order[1:])))


def allowed_spots(current: int, unvisited: set[int], n_users: int) -> list[int]:
    """Feasible next spots: dropoffs gated on their pickup, the car park
    gated on being the only spot left."""
    car_park = 2 * n_users + 1
    allowed = []
    for j in sorted(unvisited):
        if j == car_park:
            if len(unvisited) == 1:
                allowed.append(j)
        elif j > n_users:  # dropoff; its pickup has index j - n_users
            if (j - n_users) not in unvisited:
                allowed.append(j)
        else:
            allowed.append(j)
    return allowed


def order_probabilities(
    current: int,
    unvisited: set[int],
    pheromone: np.ndarray,
    dm: PairwiseResult,
    cfg: OrderAcoConfig,
) -> tuple[list[int], list[float]]:
    """Distribution over feasible next spots, ~ tau^alpha * (1/D)^beta."""
    n_users = (dm.n_spots - 2) // 2
    allowed = allowed_spots(current, unvisited, n_users)
    weights = []
    for j in allowed:
        eta = 1.0 / dm.distances[current, j]
        weights.append(pheromone[current, j] ** cfg.alpha * eta ** cfg.beta)
    total = sum(weights)
    return allowed, [w / total for w in weights]


def sample_tour(
    dm: PairwiseResult,
    pheromone: np.ndarray,
    cfg: OrderAcoConfig,
    rng: np.random.Generator,
) -> Tour:
    m = dm.n_spots
    order = [0]
    unvisited = set(range(1, m))
    length = 0.0
    current = 0
    while unvisited:
        spots, probs = order_probabilities(current, unvisited, pheromone, dm, cfg)
        u = rng.random()
        acc = 0.0
        nxt = spots[-1]
        for j, prob in zip(spots, probs):
            acc += prob
            if u < acc:
                nxt = j
                break
        length += float(dm.distances[current, nxt])
        order.append(nxt)
        unvisited.discard(nxt)
        current = nxt
    return Tour(order=tuple(order), length=length)


def is_valid_order(order: tuple[int, ...] | list[int], n_users: int) -> bool:
    """Starts at spot 0, ends at the car park, visits every spot once,
    and each pickup precedes its dropoff."""
    m = 2 * n_users + 2
    if len(order) != m or sorted(order) != list(range(m)):
        return False
    if order[0] != 0 or order[-1] != m - 1:
        return False
    position = {spot: idx for idx, spot in enumerate(order)}
    for n in range(1, n_users + 1):
        if position[n] > position[n + n_users]:
            return False
    return True


def update_order_pheromone(
    pheromone: np.ndarray,
    tour: Tour,
    cfg: OrderAcoConfig,
) -> np.ndarray:
    """Elitist update for a strictly improving tour: evaporate everything,
    deposit mu / tour length on the tour's edges."""
    pheromone *= 1.0 - cfg.rho
    amount = cfg.mu / tour.length if tour.length > 0.0 else cfg.mu
    for a, b in zip(tour.order, tour.order[1:]):
        pheromone[a, b] += amount
    return pheromone


def solve_order(
    dm: PairwiseResult,
    cfg: OrderAcoConfig,
    rng: np.random.Generator,
    trace: list[float] | None = None,
) -> Tour:
    """Best valid tour over the full iteration budget.

    If `trace` is given, the incumbent best length is appended once per
    iteration (monotone non-increasing).
    """
    m = dm.n_spots
    n_users = (m - 2) // 2
    pheromone = np.full((m, m), cfg.tau0)
    best: Tour | None = None
    d_min = math.inf
    for _ in range(cfg.iterations):
        for _ in range(cfg.ants):
            tour = sample_tour(dm, pheromone, cfg, rng)
            assert is_valid_order(tour.order, n_users)
            if tour.length < d_min:
                update_order_pheromone(pheromone, tour, cfg)
                d_min = tour.length
                best = tour
        if trace is not None:
            trace.append(d_min)
    assert best is not None
    return best


def assemble_path(tour: Tour, dm: PairwiseResult) -> list:
    """Concatenate the per-pair cell paths of a tour, dropping duplicated
    junction cells."""
    full: list = []
    for a, b in zip(tour.order, tour.order[1:]):
        segment = dm.paths.get((a, b))
        if segment is None:
            raise MissingPairPath(f"no stored path for pair ({a}, {b})")
        if full:
            segment = segment[1:]
        full.extend(segment)
    return full

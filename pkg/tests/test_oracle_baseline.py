import math

import numpy as np
import pytest

from lavp import oracle_baseline as ob
from lavp.gridworld import GridMap, Scenario, SQRT2, validate_scenario
from lavp.pairwise_aco import PairwiseResult, path_length

from conftest import random_obstacle_grid


class TestGridShortestPath:
    def test_empty_full_diagonal(self):
        grid = GridMap(20, 20)
        result = ob.grid_shortest_path(grid, (0, 0), (19, 19))
        assert result.distance == pytest.approx(19 * SQRT2, abs=1e-9)

    def test_identity(self):
        grid = GridMap(20, 20)
        assert ob.grid_shortest_path(grid, (4, 4), (4, 4)).distance == 0.0

    def test_octile_closed_form(self):
        grid = GridMap(20, 20)
        result = ob.grid_shortest_path(grid, (3, 4), (7, 9))
        assert result.distance == pytest.approx(4 * SQRT2 + 1, abs=1e-9)

    def test_path_is_valid_and_matches_distance(self):
        rng = np.random.default_rng(0)
        grid = random_obstacle_grid(15, 0.15, rng)
        a, b = (0, 0), (14, 14)
        if not grid.passable(a) or not grid.passable(b):
            pytest.skip("seeded map blocked an endpoint")
        try:
            result = ob.grid_shortest_path(grid, a, b)
        except ob.Unreachable:
            return
        assert result.path[0] == a and result.path[-1] == b
        assert all(c not in grid.obstacles for c in result.path)
        assert path_length(result.path) == pytest.approx(result.distance, abs=1e-9)

    def test_unreachable(self):
        wall = frozenset((2, y) for y in range(5))
        grid = GridMap(5, 5, wall)
        with pytest.raises(ob.Unreachable):
            ob.grid_shortest_path(grid, (0, 0), (4, 4))

    def test_matches_octile_on_random_pairs(self):
        grid = GridMap(20, 20)
        rng = np.random.default_rng(42)
        for _ in range(100):
            a = (int(rng.integers(20)), int(rng.integers(20)))
            b = (int(rng.integers(20)), int(rng.integers(20)))
            exact = ob.octile_distance(a, b)
            assert ob.grid_shortest_path(grid, a, b).distance == pytest.approx(exact, abs=1e-9)


class TestEnumerateOptimalOrder:
    def test_feasible_count_n3(self):
        assert sum(1 for _ in ob.feasible_orders(3)) == 90

    def test_feasible_count_n1_n2(self):
        assert sum(1 for _ in ob.feasible_orders(1)) == 1
        assert sum(1 for _ in ob.feasible_orders(2)) == 6  # 4!/2^2

    def test_uniform_matrix(self):
        m = 8
        d = np.full((m, m), 3.0)
        np.fill_diagonal(d, 0.0)
        dm = PairwiseResult(distances=d, paths={}, spot_list=[(i, 0) for i in range(m)])
        result = ob.enumerate_optimal_order(dm, 3)
        assert result.distance == pytest.approx(21.0)
        assert result.node_expansions == 90

    def test_too_many_users(self):
        dm = PairwiseResult(distances=np.zeros((16, 16)), paths={}, spot_list=[(0, 0)] * 16)
        with pytest.raises(ob.TooManyUsers):
            ob.enumerate_optimal_order(dm, 7)

    def test_all_returned_orders_feasible(self):
        rng = np.random.default_rng(5)
        m = 8
        raw = rng.uniform(1, 20, size=(m, m))
        d = (raw + raw.T) / 2
        np.fill_diagonal(d, 0)
        dm = PairwiseResult(distances=d, paths={}, spot_list=[(i, 0) for i in range(m)])
        order = ob.enumerate_optimal_order(dm, 3).order
        assert order[0] == 0 and order[-1] == 7
        pos = {s: i for i, s in enumerate(order)}
        assert all(pos[n] < pos[n + 3] for n in (1, 2, 3))


class TestRandomRolloutBest:
    def test_forced_degenerate(self):
        grid = GridMap(2, 2)
        sc = Scenario((0, 0), ((0, 1),), ((1, 0),), (1, 1))
        validate_scenario(grid, sc)
        result = ob.random_rollout_best(sc, grid, trials=200, step_cap=100,
                                        rng=np.random.default_rng(0))
        assert math.isfinite(result.distance)
        assert result.path[0] == (0, 0) and result.path[-1] == (1, 1)

    def test_bounded_below_by_optimum(self, small_scenario):
        grid, sc = small_scenario
        opt, _ = ob.optimal_total_distance(sc, grid)
        result = ob.random_rollout_best(sc, grid, trials=200, step_cap=500,
                                        rng=np.random.default_rng(1))
        assert result.distance >= opt - 1e-9

    def test_more_trials_never_worse(self, small_scenario):
        grid, sc = small_scenario
        d_few = ob.random_rollout_best(sc, grid, trials=50, step_cap=500,
                                       rng=np.random.default_rng(2)).distance
        d_many = ob.random_rollout_best(sc, grid, trials=200, step_cap=500,
                                        rng=np.random.default_rng(2)).distance
        assert d_many <= d_few

    def test_all_failures_infinite(self):
        grid = GridMap(6, 6)
        sc = Scenario((0, 0), ((2, 3),), ((4, 1),), (5, 5))
        result = ob.random_rollout_best(sc, grid, trials=5, step_cap=3,
                                        rng=np.random.default_rng(3))
        assert result.distance == math.inf
        assert result.failures == 5


class TestOptimalTotalDistance:
    def test_small_scenario_value(self, small_scenario):
        grid, sc = small_scenario
        dist, order = ob.optimal_total_distance(sc, grid)
        # octile legs of the unique feasible order IS -> PS1 -> DS1 -> CP
        legs = (
            ob.octile_distance((0, 0), (2, 3))
            + ob.octile_distance((2, 3), (4, 1))
            + ob.octile_distance((4, 1), (4, 4))
        )
        assert order == (0, 1, 2, 3)
        assert dist == pytest.approx(legs, abs=1e-9)

import numpy as np
import pytest

from lavp.gridworld import GridMap, Scenario, validate_scenario

SCENARIO_DIR = "src/lavp/scenarios"


@pytest.fixture
def empty_grid_20():
    return GridMap(20, 20)


@pytest.fixture
def scenario_a(empty_grid_20):
    sc = Scenario(
        initial=(0, 0),
        pickups=((3, 4), (7, 9), (10, 5)),
        dropoffs=((14, 7), (17, 16), (15, 12)),
        car_park=(19, 19),
    )
    return validate_scenario(empty_grid_20, sc)


@pytest.fixture
def small_scenario():
    """5x5 map, one user."""
    grid = GridMap(5, 5)
    sc = Scenario(initial=(0, 0), pickups=((2, 3),), dropoffs=((4, 1),), car_park=(4, 4))
    return grid, validate_scenario(grid, sc)


def random_obstacle_grid(width: int, density: float, rng: np.random.Generator) -> GridMap:
    obstacles = frozenset(
        (x, y)
        for x in range(width)
        for y in range(width)
        if rng.random() < density
    )
    return GridMap(width, width, obstacles)

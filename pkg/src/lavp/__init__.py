"""Grid-world pickup-and-delivery planning lab.

An autonomous vehicle on an obstacle grid must pick up N users, drop each
off after their pickup, and finally park at the car-park cell, minimizing
total travelled distance.  Two solvers are provided (a double-layer ant
colony optimizer and a DQN agent trained from scratch), together with
exact oracles (Dijkstra, exhaustive order enumeration) and a random
baseline for verification.
"""

from lavp.gridworld import (
    Action,
    EpisodeState,
    GridMap,
    Scenario,
    StepOutcome,
    reset,
    step,
    validate_scenario,
)

__all__ = [
    "Action",
    "EpisodeState",
    "GridMap",
    "Scenario",
    "StepOutcome",
    "reset",
    "step",
    "validate_scenario",
]

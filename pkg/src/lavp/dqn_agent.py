"""DQN training loop over the valet-parking grid world.

State encoding, epsilon-greedy action selection, FIFO experience replay,
TD targets from a soft-updated target network, and greedy evaluation
rollouts.  Training is single-threaded and, given one seed, bit
reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from lavp import gridworld
from lavp.gridworld import Action, Cell, EpisodeState, GridMap, Scenario
from lavp.neural_core import (
    AdamState,
    NetworkParams,
    adam_step,
    forward,
    gradients,
    init_network,
    soft_update,
)


class InsufficientExperience(Exception):
    pass


@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class ReplayMemory:
    """Bounded FIFO buffer sampled uniformly without replacement."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._buf: deque[Experience] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._buf)

    def push(self, exp: Experience) -> None:
        self._buf.append(exp)

    def sample(self, k: int, rng: np.random.Generator) -> list[Experience]:
        if k > len(self._buf):
            raise InsufficientExperience(f"asked for {k} of {len(self._buf)} experiences")
        idx = rng.choice(len(self._buf), size=k, replace=False)
        return [self._buf[i] for i in idx]


@dataclass
class DqnConfig:
    gamma: float = 0.99
    epsilon: float = 0.9
    batch: int = 256
    capacity: int = 10**6
    tau: float = 0.001
    lr: float = 0.0003
    episodes: int = 3500
    step_cap: int = 100
    penalty: float = 10.0
    warmup: int = 1000
    hidden: tuple[int, ...] = (400, 300, 300)
    anneal_epsilon: bool = False  # linear ramp from 0.1 to epsilon over the first half
    randomize_spots: bool = False  # fresh pickup/dropoff cells each episode

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.batch > self.capacity:
            raise ValueError("batch larger than replay capacity")


@dataclass
class TrainingStats:
    rewards: list[float] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    successes: list[bool] = field(default_factory=list)
    mean_losses: list[float] = field(default_factory=list)


def encode_state(state: EpisodeState, scenario: Scenario, grid: GridMap) -> np.ndarray:
    """Flat vector [AV xy, pickup xys, dropoff xys, car-park xy, statuses].

    Coordinates scale to [0, 1] by the grid extent, statuses by 1/2;
    length is 5N + 4.
    """
    sx = 1.0 / max(grid.width_x - 1, 1)
    sy = 1.0 / max(grid.width_y - 1, 1)
    parts = [state.position[0] * sx, state.position[1] * sy]
    for cell in scenario.pickups:
        parts += [cell[0] * sx, cell[1] * sy]
    for cell in scenario.dropoffs:
        parts += [cell[0] * sx, cell[1] * sy]
    parts += [scenario.car_park[0] * sx, scenario.car_park[1] * sy]
    parts += [u / 2.0 for u in state.statuses]
    return np.array(parts)


def select_action(q_values: np.ndarray, epsilon: float, rng: np.random.Generator) -> int:
    """Greedy with probability epsilon, else uniform; ties break low."""
    if rng.random() < epsilon:
        return int(np.argmax(q_values))
    return int(rng.integers(len(q_values)))


def td_targets(batch: list[Experience], target_params: NetworkParams, gamma: float) -> np.ndarray:
    """r for terminal samples, else r + gamma * max_a Q_target(s', a)."""
    next_states = np.stack([e.next_state for e in batch])
    q_next, _ = forward(target_params, next_states)
    max_next = q_next.max(axis=1)
    rewards = np.array([e.reward for e in batch])
    done = np.array([e.done for e in batch])
    return np.where(done, rewards, rewards + gamma * max_next)


def train_step(
    eval_params: NetworkParams,
    target_params: NetworkParams,
    adam: AdamState,
    memory: ReplayMemory,
    cfg: DqnConfig,
    rng: np.random.Generator,
) -> tuple[NetworkParams, NetworkParams, float]:
    """One replay update: sample, TD targets, MSE gradient, Adam, soft update."""
    batch = memory.sample(cfg.batch, rng)
    targets = td_targets(batch, target_params, cfg.gamma)
    states = np.stack([e.state for e in batch])
    actions = np.array([e.action for e in batch])
    q, cache = forward(eval_params, states)
    predicted = q[np.arange(len(batch)), actions]
    td_errors = targets - predicted
    loss = float(np.mean(td_errors**2))
    grads = gradients(eval_params, cache, actions, td_errors)
    eval_params = adam_step(eval_params, grads, adam)
    target_params = soft_update(target_params, eval_params, cfg.tau)
    return eval_params, target_params, loss


def _episode_epsilon(cfg: DqnConfig, episode: int) -> float:
    if not cfg.anneal_epsilon:
        return cfg.epsilon
    half = max(cfg.episodes // 2, 1)
    frac = min(episode / half, 1.0)
    return 0.1 + frac * (cfg.epsilon - 0.1)


def _random_scenario(base: Scenario, grid: GridMap, rng: np.random.Generator) -> Scenario:
    """Resample pickup/dropoff cells, keeping initial and car park fixed."""
    taken = {base.initial, base.car_park}
    cells = []
    while len(cells) < 2 * base.n_users:
        cand = (int(rng.integers(grid.width_x)), int(rng.integers(grid.width_y)))
        if cand in taken or cand in grid.obstacles:
            continue
        taken.add(cand)
        cells.append(cand)
    n = base.n_users
    return Scenario(
        initial=base.initial,
        pickups=tuple(cells[:n]),
        dropoffs=tuple(cells[n:]),
        car_park=base.car_park,
    )


def train(
    scenario: Scenario,
    grid: GridMap,
    cfg: DqnConfig,
    rng: np.random.Generator,
) -> tuple[NetworkParams, TrainingStats]:
    """Full training run; one replay update per environment step after warmup."""
    state_dim = 5 * scenario.n_users + 4
    sizes = [state_dim, *cfg.hidden, 8]
    eval_params = init_network(sizes, rng)
    target_params = eval_params.copy()
    adam = AdamState.for_params(eval_params, lr=cfg.lr)
    memory = ReplayMemory(cfg.capacity)
    warmup = max(cfg.warmup, cfg.batch)
    stats = TrainingStats()

    for episode in range(cfg.episodes):
        ep_scenario = (
            _random_scenario(scenario, grid, rng) if cfg.randomize_spots else scenario
        )
        state = gridworld.reset(ep_scenario)
        encoded = encode_state(state, ep_scenario, grid)
        epsilon = _episode_epsilon(cfg, episode)
        total_reward = 0.0
        losses: list[float] = []
        success = False
        steps = 0
        for _ in range(cfg.step_cap):
            q, _ = forward(eval_params, encoded)
            action = select_action(q[0], epsilon, rng)
            outcome = gridworld.step(state, Action(action), ep_scenario, grid, cfg.penalty)
            next_encoded = encode_state(outcome.next_state, ep_scenario, grid)
            # truncation at the step cap is not stored as terminal
            memory.push(
                Experience(encoded, action, outcome.reward, next_encoded, outcome.done)
            )
            total_reward += outcome.reward
            state = outcome.next_state
            encoded = next_encoded
            steps += 1
            if len(memory) >= warmup:
                eval_params, target_params, loss = train_step(
                    eval_params, target_params, adam, memory, cfg, rng
                )
                losses.append(loss)
            if outcome.done:
                success = True
                break
        stats.rewards.append(total_reward)
        stats.lengths.append(steps)
        stats.successes.append(success)
        stats.mean_losses.append(float(np.mean(losses)) if losses else float("nan"))
    return eval_params, stats


def greedy_rollout(
    params: NetworkParams,
    scenario: Scenario,
    grid: GridMap,
    step_cap: int = 100,
) -> tuple[list[Cell], float, bool]:
    """Pure-greedy episode; returns the visited cells, distance and success."""
    state = gridworld.reset(scenario)
    path = [state.position]
    for _ in range(step_cap):
        q, _ = forward(params, encode_state(state, scenario, grid))
        action = int(np.argmax(q[0]))
        outcome = gridworld.step(state, Action(action), scenario, grid)
        state = outcome.next_state
        path.append(state.position)
        if outcome.done:
            return path, state.traveled, True
    return path, state.traveled, False

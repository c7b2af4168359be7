"""Online replay ring, prioritized expert buffer, and minibatch mixing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..expert.dataset import ExpertDataset
from ..sim.env import OBS_DIM

ACT_DIM = 2


@dataclass
class Minibatch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    dones: np.ndarray  # 1.0 where the transition stops bootstrapping
    weights: np.ndarray
    indices: np.ndarray
    from_expert: np.ndarray

    def __post_init__(self):
        n = len(self.rewards)
        if n == 0:
            raise ValueError("empty minibatch")
        for name in ("states", "actions", "next_states", "dones", "weights", "indices", "from_expert"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} rows, expected {n}")
        if self.states.shape[1] != self.next_states.shape[1]:
            raise ValueError("state widths differ")

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def expert_rows(self) -> int:
        return int(self.from_expert.sum())


class ReplayBuffer:
    """Fixed-capacity ring of transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, obs_dim: int = OBS_DIM, act_dim: int = ACT_DIM):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, obs_dim), np.float32)
        self.actions = np.zeros((capacity, act_dim), np.float32)
        self.rewards = np.zeros(capacity, np.float32)
        self.next_states = np.zeros((capacity, obs_dim), np.float32)
        self.dones = np.zeros(capacity, np.float32)
        self.cursor = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, state, action, reward: float, next_state, stops_bootstrap: bool) -> None:
        k = self.cursor
        self.states[k] = state
        self.actions[k] = action
        self.rewards[k] = reward
        self.next_states[k] = next_state
        self.dones[k] = 1.0 if stops_bootstrap else 0.0
        self.cursor = (k + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, size=n)

    def gather(self, idx: np.ndarray) -> Minibatch:
        n = len(idx)
        return Minibatch(
            self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx],
            self.dones[idx], np.ones(n, np.float32), idx, np.zeros(n, bool),
        )

    def sample(self, rng: np.random.Generator, n: int) -> Minibatch:
        return self.gather(self.sample_indices(rng, n))


class SumTree:
    """Binary sum tree over non-negative leaf values, vectorized with numpy."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one leaf")
        self.n = n
        self.leaf0 = 1 << max(0, math.ceil(math.log2(n)))
        self.tree = np.zeros(2 * self.leaf0, np.float64)

    @property
    def total(self) -> float:
        return float(self.tree[1])

    def leaves(self) -> np.ndarray:
        return self.tree[self.leaf0 : self.leaf0 + self.n]

    def update(self, idx, values) -> None:
        idx = np.asarray(idx, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("leaf index out of range")
        if np.any(values < 0):
            raise ValueError("leaf values must be non-negative")
        pos = idx + self.leaf0
        self.tree[pos] = values  # last write wins for duplicates
        pos = np.unique(pos >> 1)
        while pos.size and pos[0] >= 1:
            self.tree[pos] = self.tree[2 * pos] + self.tree[2 * pos + 1]
            if pos[0] == 1:
                break
            pos = np.unique(pos >> 1)

    def find(self, mass: np.ndarray) -> np.ndarray:
        """Leaf index whose cumulative interval contains each ``mass`` value."""
        v = np.minimum(np.asarray(mass, dtype=np.float64), np.nextafter(self.total, 0.0))
        pos = np.ones(v.shape, np.int64)
        while pos[0] < self.leaf0 if pos.size else False:
            left = self.tree[2 * pos]
            right = v >= left
            v = np.where(right, v - left, v)
            pos = 2 * pos + right
        idx = pos - self.leaf0
        # float drift can land on an empty padding leaf
        return np.minimum(idx, self.n - 1)


class ExpertBuffer:
    """Immutable expert transitions with proportional priorities p_i^alpha."""

    def __init__(self, dataset: ExpertDataset, alpha: float = 0.6, eps: float = 1e-3, initial_priority: float = 1.0):
        if len(dataset) == 0:
            raise ValueError("expert dataset is empty")
        self.states = np.asarray(dataset.states, np.float32)
        self.actions = np.asarray(dataset.actions, np.float32)
        self.rewards = np.asarray(dataset.rewards, np.float32)
        self.next_states = np.asarray(dataset.next_states, np.float32)
        self.dones = np.asarray(dataset.dones, np.float32)
        self.alpha, self.eps = alpha, eps
        n = len(self.rewards)
        self.priorities = np.full(n, max(initial_priority, eps), np.float64)
        self.tree = SumTree(n)
        self.tree.update(np.arange(n), self.priorities**alpha)

    def __len__(self) -> int:
        return len(self.rewards)

    def probabilities(self) -> np.ndarray:
        scaled = self.priorities**self.alpha
        return scaled / scaled.sum()

    def sample_indices(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.tree.find(rng.random(n) * self.tree.total)

    def importance_weights(self, idx: np.ndarray, beta: float) -> np.ndarray:
        p = self.tree.tree[idx + self.tree.leaf0] / self.tree.total
        w = (len(self) * p) ** (-beta)
        return (w / w.max()).astype(np.float32)

    def gather(self, idx: np.ndarray, beta: float) -> Minibatch:
        return Minibatch(
            self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx],
            self.dones[idx], self.importance_weights(idx, beta), idx, np.ones(len(idx), bool),
        )

    def update_priorities(self, idx, td_errors) -> None:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= len(self)):
            raise IndexError("expert index out of range")
        p = np.abs(np.asarray(td_errors, np.float64)) + self.eps
        self.priorities[idx] = p
        self.tree.update(idx, p**self.alpha)


def concat_batches(a: Minibatch, b: Minibatch) -> Minibatch:
    return Minibatch(*(np.concatenate([getattr(a, f), getattr(b, f)]) for f in (
        "states", "actions", "rewards", "next_states", "dones", "weights", "indices", "from_expert")))


def per_sample(expert: ExpertBuffer | None, online: ReplayBuffer | None, batch_size: int, rho: float, beta: float,
               rng: np.random.Generator) -> Minibatch:
    """Mix ceil(rho * B) prioritized expert rows with uniform online rows.

    An empty (or missing) online buffer makes the batch all-expert.
    """
    has_expert = expert is not None and len(expert) > 0
    has_online = online is not None and len(online) > 0
    if not has_expert and not has_online:
        raise ValueError("both buffers are empty")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    if not has_online:
        n_exp = batch_size
    elif not has_expert:
        n_exp = 0
    else:
        n_exp = min(batch_size, math.ceil(rho * batch_size - 1e-12))
    parts = []
    if n_exp:
        parts.append(expert.gather(expert.sample_indices(rng, n_exp), beta))
    if batch_size - n_exp:
        parts.append(online.sample(rng, batch_size - n_exp))
    return parts[0] if len(parts) == 1 else concat_batches(*parts)


def per_update_priorities(expert: ExpertBuffer, indices, td_errors) -> None:
    expert.update_priorities(indices, td_errors)

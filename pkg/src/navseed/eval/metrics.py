"""Policy rollouts, episode metrics and threshold/convergence detectors."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..drl.train import TrainLog, select_action
from ..nn import ModelParams
from ..sim.env import OBS_DIM, NavEnv

OUTCOMES = ("arrived", "collided", "timeout")


@dataclass(frozen=True)
class EpisodeRow:
    episode: int
    outcome: str
    reward: float
    steps: int

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {self.outcome!r}")


@dataclass
class EvalMetrics:
    episodes: int
    success_rate: float
    collision_rate: float
    timeout_rate: float
    mean_episode_reward: float
    mean_steps_to_goal: float  # nan when nothing arrived
    rows: list[EpisodeRow] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: list[EpisodeRow]) -> EvalMetrics:
        n = len(rows)
        if n == 0:
            raise ValueError("no episodes")
        ok = [r for r in rows if r.outcome == "arrived"]
        success = len(ok) / n
        collision = sum(r.outcome == "collided" for r in rows) / n
        # complement keeps success + collision + timeout == 1.0 exactly
        timeout = 1.0 - (success + collision)
        mean_reward = math.fsum(r.reward for r in rows) / n
        mean_steps = math.fsum(r.steps for r in ok) / len(ok) if ok else math.nan
        return cls(n, success, collision, timeout, mean_reward, mean_steps, list(rows))


Policy = Callable[[np.ndarray, NavEnv], np.ndarray]


def model_policy(model: ModelParams) -> Policy:
    """Deterministic policy; SAC acts with tanh(mean)."""
    if model.actor.obs_dim != OBS_DIM:
        raise ValueError(f"model expects {model.actor.obs_dim} observation values, env gives {OBS_DIM}")
    return lambda obs, env: select_action(model, obs)


def episode_seed(rng_seed: int, k: int) -> int:
    return int(np.random.SeedSequence([rng_seed, k]).generate_state(1)[0])


def rollout(env: NavEnv, policy: Policy, seed: int, episode: int = 0) -> EpisodeRow:
    obs = env.reset(seed=seed)
    total, steps = 0.0, 0
    while True:
        out = env.step(policy(obs, env))
        total += out.reward.total
        steps += 1
        obs = out.observation
        if out.done:
            return EpisodeRow(episode, out.terminal_kind.name.lower(), total, steps)


def _rollout_job(args):
    env, policy, seed, k = args
    return rollout(env, policy, seed, k)


def run_policy(env: NavEnv, policy: ModelParams | Policy, episodes: int, rng_seed: int,
               deterministic: bool = True, workers: int = 1) -> EvalMetrics:
    """Roll out ``episodes`` episodes with per-episode seeded start/goal pairs.

    Parallel workers need a picklable policy (a ModelParams is).
    """
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if not deterministic:
        raise ValueError("evaluation is deterministic only")
    if isinstance(policy, ModelParams):
        model = policy
        fn = model_policy(model)
    else:
        model, fn = None, policy
    seeds = [episode_seed(rng_seed, k) for k in range(episodes)]
    if workers > 1 and model is not None:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_model_job, [(env, model, s, k) for k, s in enumerate(seeds)], chunksize=4))
    else:
        rows = [rollout(env, fn, s, k) for k, s in enumerate(seeds)]
    return EvalMetrics.from_rows(rows)


def _model_job(args):
    env, model, seed, k = args
    return rollout(env, model_policy(model), seed, k)


# detectors

EPISODE_METRICS = {
    "success": lambda e: 1.0 if e.outcome == "arrived" else 0.0,
    "success_rate": lambda e: 1.0 if e.outcome == "arrived" else 0.0,
    "episode_reward": lambda e: e.total_reward,
    "arrive_reward": lambda e: e.arrive_reward,
    "distance_reward": lambda e: e.distance_reward,
}
LOSS_METRICS = ("critic_loss", "actor_loss")


def metric_series(log: TrainLog, metric: str) -> tuple[np.ndarray, np.ndarray]:
    """(env step, value) pairs for a named metric of a training log."""
    if metric in EPISODE_METRICS:
        f = EPISODE_METRICS[metric]
        return (np.asarray([e.step for e in log.episodes], np.int64),
                np.asarray([f(e) for e in log.episodes], np.float64))
    if metric == "critic_loss":
        return np.asarray(log.steps, np.int64), log.critic_losses()
    if metric == "actor_loss":
        pairs = [(s, a) for s, a in zip(log.steps, log.actor_loss) if a is not None]
        return np.asarray([p[0] for p in pairs], np.int64), np.asarray([p[1] for p in pairs], np.float64)
    raise KeyError(f"unknown metric {metric!r}")


def trailing_mean(values: np.ndarray, window: int) -> np.ndarray:
    """Mean of each full trailing window; entry k covers values[k : k + window]."""
    if window < 1:
        raise ValueError("window must be >= 1")
    v = np.asarray(values, np.float64)
    if len(v) < window:
        return np.empty(0)
    c = np.concatenate([[0.0], np.cumsum(v)])
    return (c[window:] - c[:-window]) / window


def steps_to_threshold(log: TrainLog, metric: str, threshold: float, window: int) -> int | None:
    """First env step at which the trailing ``window`` mean crosses ``threshold``.

    Reward/success metrics cross upward (>=); loss metrics cross downward (<=).
    Only full windows count.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    steps, values = metric_series(log, metric)
    avg = trailing_mean(values, window)
    hit = avg <= threshold if metric in LOSS_METRICS else avg >= threshold
    idx = np.flatnonzero(hit)
    if idx.size == 0:
        return None
    return int(steps[idx[0] + window - 1])


def convergence_window(n: int) -> int:
    return max(1, min(1000, n // 20))


def steps_to_convergence(losses, steps=None, ratio: float = 1.1, window: int | None = None) -> int:
    """First step after which the trailing-window loss mean stays within
    ``ratio`` times the final window's mean."""
    losses = np.asarray(losses, np.float64)
    if losses.size == 0:
        raise ValueError("no losses")
    steps = np.arange(1, len(losses) + 1) if steps is None else np.asarray(steps)
    window = convergence_window(len(losses)) if window is None else window
    avg = trailing_mean(losses, window)
    limit = ratio * avg[-1]
    above = np.flatnonzero(avg > limit)
    first = 0 if above.size == 0 else int(above[-1]) + 1
    return int(steps[first + window - 1])


def head_tail_means(losses, n: int = 1000) -> tuple[float, float]:
    losses = np.asarray(losses, np.float64)
    return float(losses[:n].mean()), float(losses[-n:].mean())


"""Offline pretraining on an expert dataset and online adaptation loops."""

from __future__ import annotations

import bisect
import csv
import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from ..expert.dataset import ExpertDataset
from ..nn import ModelParams, actor_forward, sac_sample
from ..sim.env import NavEnv
from .algorithms import Learner
from .buffers import ExpertBuffer, Minibatch, ReplayBuffer, per_sample
from .hyper import HyperParams

log = logging.getLogger(__name__)

MODES = ("scratch", "per", "pretrain_per")
CSV_COLUMNS = ["step", "episode", "critic_loss", "actor_loss", "episode_reward", "arrive_reward",
               "distance_reward", "outcome", "env_steps"]


@dataclass
class EpisodeRecord:
    episode: int
    step: int  # env steps taken when the episode ended
    total_reward: float
    arrive_reward: float
    distance_reward: float
    outcome: str
    env_steps: int  # episode length


@dataclass
class TrainLog:
    steps: list[int] = field(default_factory=list)
    critic_loss: list[float] = field(default_factory=list)
    actor_loss: list[float | None] = field(default_factory=list)
    episodes: list[EpisodeRecord] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def record_update(self, step: int, c_loss: float, a_loss: float | None) -> None:
        if self.steps and step <= self.steps[-1]:
            raise ValueError("update steps must increase")
        self.steps.append(step)
        self.critic_loss.append(c_loss)
        self.actor_loss.append(a_loss)

    def critic_losses(self) -> np.ndarray:
        return np.asarray(self.critic_loss, np.float64)

    def actor_losses(self) -> np.ndarray:
        return np.asarray([a for a in self.actor_loss if a is not None], np.float64)

    def episode_rewards(self) -> np.ndarray:
        return np.asarray([e.total_reward for e in self.episodes], np.float64)

    def successes(self) -> np.ndarray:
        return np.asarray([e.outcome == "arrived" for e in self.episodes], np.float64)

    def rows(self) -> list[list]:
        """CSV rows ordered by step; an episode row follows that step's update row."""
        ends = [e.step for e in self.episodes]
        keyed = []
        for st, c, a in zip(self.steps, self.critic_loss, self.actor_loss):
            episode = bisect.bisect_left(ends, st)
            keyed.append(((st, 0), [st, episode, repr(c), "" if a is None else repr(a), "", "", "", "", ""]))
        for e in self.episodes:
            keyed.append(((e.step, 1), [e.step, e.episode, "", "", repr(e.total_reward), repr(e.arrive_reward),
                                        repr(e.distance_reward), e.outcome, e.env_steps]))
        keyed.sort(key=lambda kr: kr[0])
        return [r for _, r in keyed]

    def write_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            w.writerows(self.rows())


def dataset_batch(arrays, idx: np.ndarray) -> Minibatch:
    s, a, r, s2, d = arrays
    n = len(idx)
    return Minibatch(s[idx], a[idx], r[idx], s2[idx], d[idx], np.ones(n, np.float32), idx, np.ones(n, bool))


def pretrain(dataset: ExpertDataset, algo: str, hp: HyperParams, steps: int, rng_seed: int,
             model: ModelParams | None = None, progress_every: int = 0) -> tuple[ModelParams, TrainLog]:
    """Pure TD learning on a fixed dataset with uniformly sampled batches."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    init_ss, learn_ss, sample_ss = np.random.SeedSequence(rng_seed).spawn(3)
    obs_dim = dataset.states.shape[1]
    act_dim = dataset.actions.shape[1]
    if model is None:
        model = ModelParams.create(algo, np.random.default_rng(init_ss), obs_dim, act_dim,
                                   sac_target_actor=hp.sac_target_entropy_net)
    if model.algo != algo:
        raise ValueError(f"model is {model.algo}, asked to pretrain {algo}")
    if model.actor.obs_dim != obs_dim or model.actor.act_dim != act_dim:
        raise ValueError("dataset and model dimensions differ")
    learner = Learner(model, hp, np.random.default_rng(learn_ss))
    sampler = np.random.default_rng(sample_ss)
    arrays = (dataset.states, dataset.actions, dataset.rewards.astype(np.float32), dataset.next_states, dataset.dones)
    tlog = TrainLog(meta={"algo": algo, "mode": "pretrain", "seed": rng_seed, "lr": hp.lr, "steps": steps})
    t0 = time.perf_counter()
    n = len(dataset)
    for step in range(1, steps + 1):
        batch = dataset_batch(arrays, sampler.integers(0, n, size=hp.batch_size))
        res = learner.update(batch)
        tlog.record_update(step, res.critic_loss, res.actor_loss)
        if progress_every and step % progress_every == 0:
            log.info("%s pretrain step %d critic %.4g", algo, step, res.critic_loss)
    tlog.meta["wall_time"] = time.perf_counter() - t0
    return model, tlog


def select_action(model: ModelParams, obs: np.ndarray, rng: np.random.Generator | None = None,
                  explore: bool = False, noise: float = 0.1) -> np.ndarray:
    """Policy action for one observation; exploration adds Gaussian noise
    (DDPG/TD3) or samples the squashed Gaussian (SAC)."""
    x = np.asarray(obs, model.actor.dtype)[None, :]
    if not explore:
        return actor_forward(model.actor, x)[0].astype(np.float32)
    if model.algo == "sac":
        a, _, _ = sac_sample(model.actor, x, rng)
        return a[0].astype(np.float32)
    a = actor_forward(model.actor, x)[0] + noise * rng.standard_normal(2)
    return np.clip(a, -1.0, 1.0).astype(np.float32)


def online_train(env: NavEnv, init: ModelParams | None, expert: ExpertBuffer | None, mode: str, algo: str,
                 hp: HyperParams, total_env_steps: int, rng_seed: int,
                 progress_every: int = 0) -> tuple[ModelParams | None, TrainLog]:
    """Interleave environment steps with one gradient update per step.

    ``scratch`` samples uniformly from the online buffer once it holds a full
    batch. ``per`` and ``pretrain_per`` mix prioritized expert rows into every
    batch; ``pretrain_per`` starts from ``init`` and skips the random warmup.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "pretrain_per" and init is None:
        raise ValueError("pretrain_per needs initial parameters")
    if mode in ("per", "pretrain_per") and expert is None:
        raise ValueError(f"mode {mode} needs an expert buffer")
    if total_env_steps < 0:
        raise ValueError("total_env_steps must be >= 0")
    tlog = TrainLog(meta={"algo": algo, "mode": mode, "seed": rng_seed, "lr": hp.lr,
                          "env_steps": total_env_steps, "expert_rows": 0})
    if total_env_steps == 0:
        return init, tlog
    init_ss, env_ss, learn_ss, sample_ss, act_ss = np.random.SeedSequence(rng_seed).spawn(5)
    if mode == "pretrain_per":
        model = init.copy()
        if model.algo != algo:
            raise ValueError(f"initial model is {model.algo}, asked to train {algo}")
    else:
        model = ModelParams.create(algo, np.random.default_rng(init_ss), sac_target_actor=hp.sac_target_entropy_net)
    use_expert = mode != "scratch"
    learner = Learner(model, hp, np.random.default_rng(learn_ss))
    sampler = np.random.default_rng(sample_ss)
    act_rng = np.random.default_rng(act_ss)
    online = ReplayBuffer(hp.buffer_capacity)
    warmup = 0 if mode == "pretrain_per" else hp.warmup_steps

    obs = env.reset(seed=int(env_ss.generate_state(1)[0]))
    ep_total = ep_arrive = ep_dist = 0.0
    ep_len = 0
    episode = 0
    expert_rows = 0
    t0 = time.perf_counter()
    for step in range(1, total_env_steps + 1):
        if step <= warmup:
            action = act_rng.uniform(-1.0, 1.0, 2).astype(np.float32)
        else:
            action = select_action(model, obs, act_rng, explore=True, noise=hp.exploration_noise)
        out = env.step(action)
        rb = out.reward
        online.add(obs, action, rb.total, out.observation, out.terminal_kind.stops_bootstrap)
        ep_total += rb.total
        ep_arrive += rb.r_arrive
        ep_dist += rb.r_distance
        ep_len += 1
        obs = out.observation

        batch = None
        if use_expert:
            rho = hp.expert_fraction(step - 1, total_env_steps)
            beta = hp.per_beta(step - 1, total_env_steps)
            batch = per_sample(expert, online, hp.batch_size, rho, beta, sampler)
        elif len(online) >= hp.batch_size:
            batch = online.sample(sampler, hp.batch_size)
        if batch is not None:
            res = learner.update(batch)
            tlog.record_update(step, res.critic_loss, res.actor_loss)
            if use_expert and batch.expert_rows:
                mask = batch.from_expert
                expert.update_priorities(batch.indices[mask], res.td_errors[mask])
                expert_rows += batch.expert_rows

        if out.done:
            tlog.episodes.append(EpisodeRecord(episode, step, ep_total, ep_arrive, ep_dist,
                                               out.terminal_kind.name.lower(), ep_len))
            if progress_every and episode % progress_every == 0:
                log.info("%s/%s step %d episode %d reward %.1f %s", mode, algo, step, episode, ep_total,
                         out.terminal_kind.name.lower())
            episode += 1
            ep_total = ep_arrive = ep_dist = 0.0
            ep_len = 0
            obs = env.reset()
    tlog.meta["expert_rows"] = expert_rows
    tlog.meta["wall_time"] = time.perf_counter() - t0
    return model, tlog

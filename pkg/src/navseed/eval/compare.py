"""Regime comparisons: offline algorithm sweep and online training modes."""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..drl import ExpertBuffer, HyperParams, TrainLog, online_train, pretrain
from ..expert.dataset import ExpertDataset
from ..nn import ALGORITHMS
from ..sim.env import EpisodeConfig, NavEnv
from ..sim.reward import RewardParams
from ..sim.world import WorldMap
from .metrics import head_tail_means, steps_to_convergence, steps_to_threshold, trailing_mean

ONLINE_REGIMES = ("scratch", "per", "pretrain_per")


def config_hash(*parts) -> str:
    """Stable short hash of dataclasses / dicts / scalars."""
    items = []
    for p in parts:
        if hasattr(p, "__dataclass_fields__"):
            p = asdict(p)
        items.append(repr(sorted(p.items())) if isinstance(p, dict) else repr(p))
    return hashlib.sha256("|".join(items).encode()).hexdigest()[:16]


@dataclass
class RunSummary:
    label: str
    seed: int
    config_hash: str
    min_loss: float
    max_loss: float
    end_loss: float
    wall_time: float
    steps_to_threshold: int | None
    extra: dict = field(default_factory=dict)


@dataclass
class ComparisonReport:
    kind: str
    runs: list[RunSummary] = field(default_factory=list)

    def labels(self) -> list[str]:
        seen = []
        for r in self.runs:
            if r.label not in seen:
                seen.append(r.label)
        return seen

    def by_label(self, label: str) -> list[RunSummary]:
        return [r for r in self.runs if r.label == label]

    def by_seed(self, label: str) -> dict[int, RunSummary]:
        return {r.seed: r for r in self.by_label(label)}

    def aggregate(self) -> dict[str, dict[str, float]]:
        """Per-label means across seeds (threshold means over runs that reached it)."""
        out = {}
        for label in self.labels():
            runs = self.by_label(label)
            row = {k: float(np.mean([getattr(r, k) for r in runs])) for k in ("min_loss", "max_loss", "end_loss", "wall_time")}
            reached = [r.steps_to_threshold for r in runs if r.steps_to_threshold is not None]
            row["steps_to_threshold"] = float(np.mean(reached)) if reached else math.nan
            row["reached"] = float(len(reached))
            for key in sorted({k for r in runs for k in r.extra}):
                vals = [r.extra[key] for r in runs if isinstance(r.extra.get(key), (int, float))]
                if vals:
                    row[key] = float(np.mean(vals))
            out[label] = row
        return out


def loss_summary(losses: np.ndarray) -> tuple[float, float, float]:
    """(min, max, end) of the windowed critic loss."""
    w = max(1, min(1000, len(losses) // 20))
    avg = trailing_mean(losses, w)
    return float(avg.min()), float(avg.max()), float(avg[-1])


def compare_offline(dataset: ExpertDataset, hp: HyperParams, steps: int, seeds, algos=ALGORITHMS,
                    progress=None) -> tuple[ComparisonReport, dict, dict]:
    """Pretrain every algorithm on the same data with the same seeds.

    Returns (report, logs, models) keyed by (algo, seed).
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    report = ComparisonReport("offline")
    logs, models = {}, {}
    for seed in seeds:
        for algo in algos:
            model, log = pretrain(dataset, algo, hp, steps, seed)
            losses = log.critic_losses()
            lo, hi, end = loss_summary(losses)
            head, tail = head_tail_means(losses, min(1000, len(losses)))
            report.runs.append(RunSummary(
                algo, seed, config_hash(hp, {"algo": algo, "steps": steps, "n": len(dataset)}), lo, hi, end,
                log.meta["wall_time"], steps_to_convergence(losses, log.steps),
                {"first_window_loss": head, "final_window_loss": tail},
            ))
            logs[(algo, seed)] = log
            models[(algo, seed)] = model
            if progress:
                progress(f"offline {algo} seed {seed}: converged at {report.runs[-1].steps_to_threshold}")
    return report, logs, models


def final_online_stats(log: TrainLog, last_rewards: int = 5, last_success: int = 20) -> dict:
    rewards = log.episode_rewards()
    succ = log.successes()
    return {
        "episodes": len(rewards),
        "final_reward": float(rewards[-last_rewards:].mean()) if len(rewards) else math.nan,
        "final_success": float(succ[-last_success:].mean()) if len(succ) else math.nan,
        "expert_rows": log.meta.get("expert_rows", 0),
    }


def compare_online(world: WorldMap, dataset: ExpertDataset, init_models, hp: HyperParams, env_step_budget: int,
                   seeds, algo: str = "td3", regimes=ONLINE_REGIMES, episode: EpisodeConfig = EpisodeConfig(),
                   reward: RewardParams = RewardParams(), threshold: float = 0.6, window: int = 20,
                   progress=None) -> tuple[ComparisonReport, dict, dict]:
    """Train each regime per seed under one env-step budget.

    ``init_models`` is a ModelParams shared by all seeds or a dict seed -> ModelParams.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    report = ComparisonReport("online")
    logs, models = {}, {}
    for seed in seeds:
        init = init_models.get(seed) if isinstance(init_models, dict) else init_models
        for regime in regimes:
            if regime == "pretrain_per" and init is None:
                raise ValueError(f"pretrain_per needs an initial model for seed {seed}")
            env = NavEnv(world, episode, reward)
            expert = None if regime == "scratch" else ExpertBuffer(dataset, hp.per_alpha, hp.per_eps)
            model, log = online_train(env, init if regime == "pretrain_per" else None, expert, regime, algo, hp,
                                      env_step_budget, seed)
            losses = log.critic_losses()
            lo, hi, end = loss_summary(losses) if len(losses) else (math.nan,) * 3
            stats = final_online_stats(log)
            report.runs.append(RunSummary(
                regime, seed, config_hash(hp, episode, reward, {"algo": algo, "regime": regime, "budget": env_step_budget,
                                                                "map": world.name, "n": len(dataset)}),
                lo, hi, end, log.meta.get("wall_time", 0.0), steps_to_threshold(log, "success", threshold, window), stats,
            ))
            logs[(regime, seed)] = log
            models[(regime, seed)] = model
            if progress:
                progress(f"online {regime} seed {seed}: final reward {stats['final_reward']:.1f} "
                         f"success {stats['final_success']:.2f}")
    return report, logs, models



from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..sim.env import EpisodeConfig, NavEnv
from ..sim.kinematics import Pose
from ..sim.reward import RewardParams, TerminalKind
from ..sim.world import WorldMap, sample_free_point
from .astar import NoPathError, astar_plan
from .dataset import ExpertDataset, TransitionRecord, write_dataset
from .dwa import ClearanceField, DWAConfig, dwa_control

log = logging.getLogger(__name__)


def sample_goal(world: WorldMap, rng: np.random.Generator, min_clearance: float) -> tuple[float, float]:
    """A goal uniformly over free cells at least ``min_clearance`` from any wall."""
    return sample_free_point(world, rng, min_clearance)


@dataclass
class ExpertPlanner:
    """A* global path, refreshed every ``replan_every`` steps, tracked by DWA."""

    world: WorldMap
    dwa: DWAConfig = field(default_factory=DWAConfig)
    robot_radius: float = 0.18
    inflate_margin: float = 0.05
    replan_every: int = 10

    def __post_init__(self):
        self.clearance = ClearanceField(self.world)
        self.reset()

    @property
    def inflate_radius(self) -> float:
        return self.robot_radius + self.inflate_margin

    def reset(self):
        self.path = None
        self.velocity = (0.0, 0.0)
        self._since_plan = 0

    def act(self, pose: Pose, goal: tuple[float, float], scan: np.ndarray, v_max: float, omega_max: float):
        if self.path is None or self._since_plan >= self.replan_every:
            self.path = astar_plan(self.world, (pose.x, pose.y), goal, self.inflate_radius, snap_start=True)
            self.path.waypoints.append(tuple(goal))
            self._since_plan = 0
        self._since_plan += 1
        cmd = dwa_control(
            pose, self.velocity, self.path, scan, self.dwa,
            clearance=self.clearance, robot_radius=self.robot_radius, v_max=v_max, omega_max=omega_max,
        )
        self.velocity = (cmd.v, cmd.omega)
        return cmd


def generate_episode(env: NavEnv, planner: ExpertPlanner, obs: np.ndarray, rng: np.random.Generator | None = None) -> list[TransitionRecord]:
    """Roll the expert from the env's current (freshly reset) state to a terminal."""
    planner.reset()
    records = []
    cfg = env.config
    while True:
        cmd = planner.act(env.pose, env.goal, env.scan, cfg.v_max, cfg.omega_max)
        action = np.array(cmd.normalized, dtype=np.float32)
        out = env.step(action)
        records.append(TransitionRecord(obs, action, float(out.reward.total), out.observation, out.terminal_kind))
        obs = out.observation
        if out.done:
            return records


@dataclass(frozen=True)
class CollectConfig:
    episode: EpisodeConfig = EpisodeConfig()
    reward: RewardParams = RewardParams()
    dwa: DWAConfig = DWAConfig()
    replan_every: int = 10
    inflate_margin: float = 0.05
    include_failures: bool = False


def run_expert_episode(world: WorldMap, cfg: CollectConfig, seed: int) -> tuple[list[TransitionRecord], TerminalKind]:
    env = NavEnv(world, cfg.episode, cfg.reward)
    obs = env.reset(seed=seed)
    planner = ExpertPlanner(world, cfg.dwa, cfg.episode.robot_radius, cfg.inflate_margin, cfg.replan_every)
    try:
        records = generate_episode(env, planner, obs)
    except NoPathError as exc:
        log.debug("episode seed %d discarded: %s", seed, exc)
        return [], TerminalKind.NONE
    return records, records[-1].done_kind


def _episode_job(args):
    world, cfg, seed = args
    return run_expert_episode(world, cfg, seed)


def build_dataset(
    world: WorldMap,
    n_episodes: int,
    cfg: CollectConfig = CollectConfig(),
    seed: int = 0,
    out_path: str | os.PathLike | None = None,
    workers: int = 1,
    max_transitions: int | None = None,
) -> tuple[ExpertDataset, dict]:
    """Run ``n_episodes`` expert episodes (episode ``k`` seeded ``seed + k``).

    With ``max_transitions`` set, episodes stop being added once that many
    records are kept and the dataset is cut to exactly that length.
    """
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    jobs = [(world, cfg, seed + k) for k in range(n_episodes)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = pool.map(_episode_job, jobs, chunksize=4)
            results = list(results)
    else:
        results = map(_episode_job, jobs)

    kept: list[TransitionRecord] = []
    counts = {k: 0 for k in TerminalKind}
    returns = []
    attempted = 0
    for records, kind in results:
        attempted += 1
        counts[kind] += 1
        if records:
            returns.append(sum(r.reward for r in records))
        if kind is TerminalKind.ARRIVED or (cfg.include_failures and records):
            kept.extend(records)
        if max_transitions is not None and len(kept) >= max_transitions:
            kept = kept[:max_transitions]
            break
    dataset = ExpertDataset.from_records(kept)
    stats = {
        "episodes_attempted": attempted,
        "success_episodes": counts[TerminalKind.ARRIVED],
        "collision_episodes": counts[TerminalKind.COLLIDED],
        "timeout_episodes": counts[TerminalKind.TIMEOUT],
        "planner_failures": counts[TerminalKind.NONE],
        "success_rate": counts[TerminalKind.ARRIVED] / attempted,
        "mean_episode_reward": float(np.mean(returns)) if returns else 0.0,
        "records": len(dataset),
        "warning": "",
    }
    if stats["success_rate"] < 0.5:
        stats["warning"] = f"expert success rate {stats['success_rate']:.2f} below 0.5"
        log.warning(stats["warning"])
    if out_path is not None:
        write_dataset(dataset, out_path)
    return dataset, stats

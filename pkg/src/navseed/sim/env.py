from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import OMEGA_MAX, V_MAX, ActionCommand, Pose, goal_polar, substep_count, substeps
from .lidar import N_BEAMS, RANGE_MAX, raycast
from .reward import RewardBreakdown, RewardParams, TerminalKind, compute_reward
from .world import InfeasibleError, WorldMap, check_collision, sample_free_point

OBS_DIM = 40
GOAL_DISTANCE_SCALE = 10.0


class EnvUsageError(RuntimeError):
    pass


@dataclass(frozen=True)
class EpisodeConfig:
    control_interval: float = 0.5
    physics_substep: float = 0.05
    max_control_steps: int = 200
    arrival_distance: float = 0.3
    robot_radius: float = 0.18
    # sampled start/goal
    spawn_clearance: float = 0.3
    min_goal_distance: float = 1.0
    max_goal_distance: float = 8.0
    v_max: float = V_MAX
    omega_max: float = OMEGA_MAX
    lidar_noise: float = 0.0

    def __post_init__(self):
        substep_count(self.control_interval, self.physics_substep)
        if self.max_control_steps < 1:
            raise ValueError("max_control_steps must be positive")
        if not self.spawn_clearance >= self.robot_radius:
            raise ValueError("spawn_clearance must be at least robot_radius")
        if not 0 <= self.min_goal_distance < self.max_goal_distance:
            raise ValueError("need 0 <= min_goal_distance < max_goal_distance")


def make_observation(scan: np.ndarray, goal: tuple[float, float], prev_action: tuple[float, float]) -> np.ndarray:
    """laser(36)/6.5, distance/10 clipped to 1, bearing/pi, previous normalized action."""
    obs = np.empty(OBS_DIM, dtype=np.float32)
    obs[:N_BEAMS] = np.asarray(scan, dtype=np.float64) / RANGE_MAX
    obs[N_BEAMS] = min(goal[0] / GOAL_DISTANCE_SCALE, 1.0)
    obs[N_BEAMS + 1] = goal[1] / math.pi
    obs[N_BEAMS + 2] = prev_action[0]
    obs[N_BEAMS + 3] = prev_action[1]
    return obs


@dataclass
class StepOutcome:
    observation: np.ndarray
    reward: RewardBreakdown
    done: bool
    terminal_kind: TerminalKind
    info: dict = field(default_factory=dict)


class NavEnv:
    """Single-robot point-to-goal episode on a static map."""

    def __init__(
        self,
        world: WorldMap,
        config: EpisodeConfig = EpisodeConfig(),
        reward_params: RewardParams = RewardParams(),
        seed: int | None = None,
    ):
        self.world = world
        self.config = config
        self.reward_params = reward_params
        self.rng = np.random.default_rng(seed)
        self._n_sub = substep_count(config.control_interval, config.physics_substep)
        self.pose: Pose | None = None
        self.goal: tuple[float, float] | None = None
        self.scan: np.ndarray | None = None
        self.prev_action = (0.0, 0.0)
        self.steps = 0
        self.d_prev = 0.0
        self._needs_reset = True

    def sample_start_goal(self, rng: np.random.Generator) -> tuple[Pose, tuple[float, float]]:
        cfg = self.config
        for _ in range(1000):
            sx, sy = sample_free_point(self.world, rng, cfg.spawn_clearance)
            gx, gy = sample_free_point(self.world, rng, cfg.spawn_clearance)
            d = math.hypot(gx - sx, gy - sy)
            if cfg.min_goal_distance <= d <= cfg.max_goal_distance:
                theta = float(rng.uniform(-math.pi, math.pi))
                return Pose(sx, sy, theta), (gx, gy)
        raise InfeasibleError("could not sample a start/goal pair within the distance limits")

    def reset(self, start: Pose | None = None, goal: tuple[float, float] | None = None, seed: int | None = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        if start is None or goal is None:
            s, g = self.sample_start_goal(self.rng)
            start = s if start is None else start
            goal = g if goal is None else goal
        r = self.config.robot_radius
        if check_collision(self.world, start.x, start.y, r):
            raise InfeasibleError(f"start ({start.x:.2f}, {start.y:.2f}) lacks {r} m clearance")
        if check_collision(self.world, goal[0], goal[1], r):
            raise InfeasibleError(f"goal ({goal[0]:.2f}, {goal[1]:.2f}) lacks {r} m clearance")
        self.pose = start
        self.goal = (float(goal[0]), float(goal[1]))
        self.steps = 0
        self.prev_action = (0.0, 0.0)
        self.scan = self._scan(start)
        self.d_prev = goal_polar(start, self.goal)[0]
        self._needs_reset = False
        return make_observation(self.scan, goal_polar(start, self.goal), self.prev_action)

    def _scan(self, pose: Pose) -> np.ndarray:
        return raycast(self.world, pose, self.config.lidar_noise, self.rng)

    def command(self, action) -> ActionCommand:
        a = np.asarray(action, dtype=np.float64).reshape(-1)
        if a.shape != (2,) or not np.all(np.isfinite(a)):
            raise ValueError("action must be two finite values")
        return ActionCommand(float(a[0]), float(a[1]), self.config.v_max, self.config.omega_max)

    def step(self, action) -> StepOutcome:
        if self._needs_reset:
            raise EnvUsageError("step() called before reset() or after a terminal step")
        cmd = self.command(action)
        cfg = self.config
        collided = False
        pose = self.pose
        for p in substeps(self.pose, cmd.v, cmd.omega, cfg.physics_substep, self._n_sub):
            pose = p
            if check_collision(self.world, p.x, p.y, cfg.robot_radius):
                collided = True
                break
        self.pose = pose
        self.steps += 1
        dist, bearing = goal_polar(pose, self.goal)
        if collided:
            kind = TerminalKind.COLLIDED
        elif dist < cfg.arrival_distance:
            kind = TerminalKind.ARRIVED
        elif self.steps >= cfg.max_control_steps:
            kind = TerminalKind.TIMEOUT
        else:
            kind = TerminalKind.NONE
        # the robot centre never enters an occupied cell: a collision is detected
        # once the disc touches one, well before
        self.scan = self._scan(pose)
        reward = compute_reward(self.d_prev, dist, self.scan, cmd.v, cmd.omega, kind, self.reward_params)
        self.d_prev = dist
        self.prev_action = cmd.normalized
        obs = make_observation(self.scan, (dist, bearing), self.prev_action)
        if kind.done:
            self._needs_reset = True
        return StepOutcome(obs, reward, kind.done, kind, {"pose": pose, "distance": dist, "command": cmd})

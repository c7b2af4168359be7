from .env import OBS_DIM, EnvUsageError, EpisodeConfig, NavEnv, StepOutcome, make_observation
from .kinematics import ActionCommand, Pose, goal_polar, normalize_angle, step_dynamics
from .lidar import N_BEAMS, RANGE_MAX, RANGE_MIN, InvalidPoseError, raycast
from .reward import RewardBreakdown, RewardParams, TerminalKind, compute_reward
from .world import (
    BUILTIN_MAPS,
    InfeasibleError,
    MapFormatError,
    WorldMap,
    builtin_map,
    check_collision,
    dump_map,
    load_map,
    resolve_map,
    sample_free_point,
)

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


class TerminalKind(IntEnum):
    NONE = 0
    ARRIVED = 1
    COLLIDED = 2
    TIMEOUT = 3

    @property
    def done(self) -> bool:
        return self is not TerminalKind.NONE

    @property
    def stops_bootstrap(self) -> bool:
        return self in (TerminalKind.ARRIVED, TerminalKind.COLLIDED)


@dataclass(frozen=True)
class RewardParams:
    w_distance: float = 5.0
    r_c: float = -10.0
    d_threshold: float = 0.35
    R_success: float = 100.0
    R_fail: float = -100.0
    v_slow: float = 0.1
    omega_limit: float = 0.5
    linear_penalty: float = -4.0
    angular_penalty: float = -1.0

    def __post_init__(self):
        if not self.R_success > 0 > self.R_fail:
            raise ValueError("need R_success > 0 > R_fail")
        if not self.r_c < 0:
            raise ValueError("r_c must be negative")
        if not self.d_threshold > 0:
            raise ValueError("d_threshold must be positive")


@dataclass(frozen=True)
class RewardBreakdown:
    r_distance: float
    r_collision: float
    r_velocity: float
    r_arrive: float

    @property
    def total(self) -> float:
        return self.r_distance + self.r_collision + self.r_velocity + self.r_arrive


def compute_reward(
    d_prev: float,
    d_curr: float,
    scan: np.ndarray,
    v: float,
    omega: float,
    terminal: TerminalKind,
    params: RewardParams = RewardParams(),
) -> RewardBreakdown:
    """Progress + proximity + velocity + terminal reward for one control step.

    ``v`` and ``omega`` are physical (m/s, rad/s).
    """
    scan = np.asarray(scan, dtype=np.float64)
    if not (math.isfinite(d_prev) and math.isfinite(d_curr) and math.isfinite(v) and math.isfinite(omega)):
        raise ValueError("reward inputs must be finite")
    if scan.size == 0 or not np.all(np.isfinite(scan)):
        raise ValueError("scan must be non-empty and finite")

    r_distance = params.w_distance * (d_prev - d_curr)

    nearest = float(scan.min())
    if nearest > 2.0 * params.d_threshold:
        r_collision = 0.0
    elif nearest > params.d_threshold:
        r_collision = params.r_c
    else:
        r_collision = 2.0 * params.r_c

    r_linear = 0.0 if v >= params.v_slow else params.linear_penalty
    r_angular = 0.0 if -params.omega_limit <= omega <= params.omega_limit else params.angular_penalty

    terminal = TerminalKind(terminal)
    if terminal is TerminalKind.ARRIVED:
        r_arrive = params.R_success
    elif terminal is TerminalKind.COLLIDED:
        r_arrive = params.R_fail
    else:
        r_arrive = 0.0

    return RewardBreakdown(r_distance, r_collision, r_linear + r_angular, r_arrive)

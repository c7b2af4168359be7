"""Dynamic-window local controller tracking an A* path."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..sim.kinematics import OMEGA_MAX, V_MAX, ActionCommand, Pose, normalize_angle
from ..sim.lidar import BEAM_OFFSETS, RANGE_MAX
from ..sim.world import WorldMap
from .astar import PlannedPath


@dataclass(frozen=True)
class DWAConfig:
    v_samples: int = 7
    w_samples: int = 15
    horizon: float = 1.5
    sim_dt: float = 0.1
    weight_heading: float = 0.8
    weight_clearance: float = 0.2
    weight_velocity: float = 0.1
    v_accel: float = 0.5
    w_accel: float = 3.0
    window_dt: float = 0.5
    lookahead: float = 0.5
    clearance_cap: float = 1.0
    safety_margin: float = 0.04
    path_tolerance: float = 0.5
    escape_cone: float = math.radians(70.0)
    escape_tolerance: float = math.radians(10.0)

    def __post_init__(self):
        if self.v_samples < 1 or self.w_samples < 1:
            raise ValueError("need at least one sample per axis")
        for name in ("weight_heading", "weight_clearance", "weight_velocity"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def lookahead_target(path: PlannedPath, x: float, y: float, lookahead: float) -> tuple[tuple[float, float], int]:
    """Path point ``lookahead`` metres past the waypoint nearest the robot."""
    pts = np.asarray(path.waypoints, dtype=np.float64)
    nearest = int(np.argmin(np.hypot(pts[:, 0] - x, pts[:, 1] - y)))
    acc = 0.0
    k = nearest
    while k + 1 < len(pts) and acc < lookahead:
        acc += float(np.hypot(*(pts[k + 1] - pts[k])))
        k += 1
    return (float(pts[k, 0]), float(pts[k, 1])), nearest


class ClearanceField:
    """Distance from world points to the nearest occupied cell of a map.

    Measured to the square of the occupied cell whose centre is nearest the
    query cell's centre, which is within a few millimetres of exact.
    """

    def __init__(self, world: WorldMap):
        from scipy import ndimage

        self.world = world
        _, idx = ndimage.distance_transform_edt(~world.cells, return_indices=True)
        self.near_j, self.near_i = idx[0], idx[1]

    def __call__(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        w = self.world
        ox, oy = w.origin
        gx, gy = (np.asarray(xs) - ox) / w.resolution, (np.asarray(ys) - oy) / w.resolution
        i = np.clip(np.floor(gx).astype(np.int64), 0, w.width_cells - 1)
        j = np.clip(np.floor(gy).astype(np.int64), 0, w.height_cells - 1)
        ni, nj = self.near_i[j, i], self.near_j[j, i]
        dx = np.maximum(np.maximum(ni - gx, gx - (ni + 1)), 0.0)
        dy = np.maximum(np.maximum(nj - gy, gy - (nj + 1)), 0.0)
        return np.hypot(dx, dy) * w.resolution


def scan_clearance(pose: Pose, scan: np.ndarray):
    """Clearance function built from the scan's obstacle returns."""
    scan = np.asarray(scan, dtype=np.float64)
    hit = scan < RANGE_MAX - 1e-9
    ang = pose.theta + BEAM_OFFSETS[hit]
    ox = pose.x + scan[hit] * np.cos(ang)
    oy = pose.y + scan[hit] * np.sin(ang)

    def clearance(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        if ox.size == 0:
            return np.full(np.shape(xs), RANGE_MAX)
        d = np.hypot(xs[..., None] - ox, ys[..., None] - oy)
        return d.min(axis=-1)

    return clearance


def dwa_control(
    pose: Pose,
    velocity: tuple[float, float],
    path: PlannedPath,
    scan: np.ndarray,
    cfg: DWAConfig = DWAConfig(),
    *,
    clearance=None,
    robot_radius: float = 0.18,
    v_max: float = V_MAX,
    omega_max: float = OMEGA_MAX,
    arrive_radius: float = 0.3,
) -> ActionCommand:
    """Best admissible (v, omega) over the dynamic window.

    ``clearance`` maps world points to obstacle distance; the scan returns are
    used when it is omitted.
    """
    if not path.waypoints:
        raise ValueError("path must be non-empty")
    if clearance is None:
        clearance = scan_clearance(pose, scan)
    v0, w0 = velocity
    dv, dw = cfg.v_accel * cfg.window_dt, cfg.w_accel * cfg.window_dt
    vs = np.linspace(max(0.0, v0 - dv), min(v_max, v0 + dv), cfg.v_samples)
    ws = np.linspace(max(-omega_max, w0 - dw), min(omega_max, w0 + dw), cfg.w_samples)
    V, W = np.meshgrid(vs, ws, indexing="ij")
    V, W = V.ravel(), W.ravel()

    n = max(1, int(round(cfg.horizon / cfg.sim_dt)))
    t = np.arange(1, n + 1) * cfg.sim_dt
    th = pose.theta + W[:, None] * t
    # closed-form constant-curvature rollout
    small = np.abs(W) < 1e-9
    Wsafe = np.where(small, 1.0, W)
    xs = np.where(small[:, None], pose.x + V[:, None] * t * math.cos(pose.theta),
                  pose.x + (V / Wsafe)[:, None] * (np.sin(th) - math.sin(pose.theta)))
    ys = np.where(small[:, None], pose.y + V[:, None] * t * math.sin(pose.theta),
                  pose.y - (V / Wsafe)[:, None] * (np.cos(th) - math.cos(pose.theta)))

    clear_t = clearance(xs, ys)
    here = float(clearance(np.array([pose.x]), np.array([pose.y]))[0])
    # already inside the margin: only forbid losing more clearance
    limit = max(min(robot_radius + cfg.safety_margin, here - 1e-3), robot_radius + 1e-3)
    goal = path.waypoints[-1]
    arrived = np.hypot(xs - goal[0], ys - goal[1]) < arrive_radius
    past_goal = np.cumsum(arrived, axis=1) > 0
    unsafe = (clear_t < limit) & ~past_goal
    first_hit = np.where(unsafe.any(axis=1), unsafe.argmax(axis=1), n)
    t_hit = np.where(first_hit < n, t[np.minimum(first_hit, n - 1)], math.inf)
    # admissible: the command can run one control interval and still brake in time
    ok = t_hit > cfg.window_dt + V / (2.0 * cfg.v_accel)
    target, _ = lookahead_target(path, pose.x, pose.y, cfg.lookahead)
    if not ok.any():
        bearing = normalize_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)
        return ActionCommand.from_physical(0.0, math.copysign(omega_max, bearing) if bearing else 0.0, v_max, omega_max)

    horizon_mask = np.arange(n)[None, :] < first_hit[:, None]
    min_clear = np.where(horizon_mask | past_goal, clear_t, np.inf).min(axis=1)
    min_clear = np.where(np.isfinite(min_clear), min_clear, here)

    end_x, end_y, end_th = xs[:, -1], ys[:, -1], th[:, -1]
    err = np.arctan2(target[1] - end_y, target[0] - end_x) - end_th
    err = np.abs(np.arctan2(np.sin(err), np.cos(err)))
    align = 1.0 - err / math.pi
    d0 = math.hypot(target[0] - pose.x, target[1] - pose.y)
    d_end = np.hypot(target[0] - end_x, target[1] - end_y)
    reach = max(v_max * cfg.horizon, 1e-9)
    progress = np.clip((d0 - d_end) / reach, -1.0, 1.0)
    pts = np.asarray(path.waypoints, dtype=np.float64)
    off_path = np.hypot(end_x[:, None] - pts[:, 0], end_y[:, None] - pts[:, 1]).min(axis=1)
    on_path = 1.0 - np.minimum(off_path / cfg.path_tolerance, 1.0)
    heading = 0.4 * align + 0.15 * (progress + 1.0) + 0.3 * on_path

    clear = np.clip(min_clear - robot_radius, 0.0, cfg.clearance_cap) / cfg.clearance_cap
    speed = V / v_max if v_max > 0 else np.zeros_like(V)
    score = cfg.weight_heading * heading + cfg.weight_clearance * clear + cfg.weight_velocity * speed
    score = np.where(ok, score, -np.inf)
    # lexsort: last key is primary
    order = np.lexsort((np.abs(W), -V, -score))
    k = int(order[0])
    if V[k] == 0.0:
        return _unstick(pose, scan, target, cfg, v_max, omega_max)
    return ActionCommand.from_physical(float(V[k]), float(W[k]), v_max, omega_max)


def _unstick(pose: Pose, scan: np.ndarray, target, cfg: DWAConfig, v_max: float, omega_max: float) -> ActionCommand:
    """Rotate in place toward a heading that leaves the nearest obstacle.

    The heading is the target bearing, limited to within ``escape_cone`` of
    the direction pointing away from the closest scan return.
    """
    scan = np.asarray(scan, dtype=np.float64)
    k = int(np.argmin(scan))
    away = pose.theta + float(BEAM_OFFSETS[k]) + math.pi
    want = math.atan2(target[1] - pose.y, target[0] - pose.x)
    off = normalize_angle(want - away)
    if abs(off) > cfg.escape_cone:
        want = away + math.copysign(cfg.escape_cone, off)
    err = normalize_angle(want - pose.theta)
    if abs(err) < cfg.escape_tolerance:
        return ActionCommand.from_physical(v_max * 0.5, 0.0, v_max, omega_max)
    omega = max(-omega_max, min(omega_max, err / cfg.window_dt))
    return ActionCommand.from_physical(0.0, omega, v_max, omega_max)

"""36-beam planar lidar by exact grid traversal."""

from __future__ import annotations

import math

import numpy as np

from .kinematics import Pose
from .world import WorldMap

N_BEAMS = 36
RANGE_MIN = 0.1
RANGE_MAX = 6.5
BEAM_OFFSETS = np.deg2rad(np.arange(N_BEAMS) * 10.0)


class InvalidPoseError(ValueError):
    pass


def _crossings(world: WorldMap, g0: float, g1: float, d0: np.ndarray, d1: np.ndarray, axis: int, k: int) -> np.ndarray:
    """Distance (cells) along each beam to the first occupied cell entered across
    grid lines perpendicular to ``axis``; inf if none within ``k`` crossings."""
    steps = np.arange(k, dtype=np.float64)
    pos = d0 > 0
    # moving +: cross lines floor+1, floor+2, ...; moving -: floor, floor-1, ...
    base = np.where(pos, math.floor(g0) + 1.0, float(math.floor(g0)))
    lines = np.where(pos[:, None], base[:, None] + steps, base[:, None] - steps)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = (lines - g0) / d0[:, None]
    t = np.where(np.abs(d0)[:, None] < 1e-12, np.inf, t)
    entered = np.where(pos[:, None], lines, lines - 1.0)
    with np.errstate(invalid="ignore"):
        other = g1 + t * d1[:, None]
    finite = np.isfinite(t)
    entered_i = np.where(finite, entered, -1).astype(np.int64)
    other_i = np.where(finite, np.floor(np.where(finite, other, 0.0)), -1).astype(np.int64)
    if axis == 0:
        ii, jj = entered_i, other_i
    else:
        ii, jj = other_i, entered_i
    inside = (ii >= 0) & (ii < world.width_cells) & (jj >= 0) & (jj < world.height_cells)
    occ = np.ones_like(inside)
    occ[inside] = world.cells[jj[inside], ii[inside]]
    hit = finite & occ
    t_hit = np.where(hit, t, np.inf)
    return t_hit.min(axis=1)


def raycast(world: WorldMap, pose: Pose, noise_std: float = 0.0, rng: np.random.Generator | None = None) -> np.ndarray:
    """Ranges (m) of the 36 beams, beam 0 along the heading, counter-clockwise."""
    if world.occupied_at(pose.x, pose.y):
        raise InvalidPoseError(f"pose ({pose.x:.3f}, {pose.y:.3f}) lies in an occupied cell")
    res = world.resolution
    ox, oy = world.origin
    gx, gy = (pose.x - ox) / res, (pose.y - oy) / res
    ang = pose.theta + BEAM_OFFSETS
    dx, dy = np.cos(ang), np.sin(ang)
    k = int(math.ceil(RANGE_MAX / res)) + 2
    tx = _crossings(world, gx, gy, dx, dy, 0, k)
    ty = _crossings(world, gy, gx, dy, dx, 1, k)
    ranges = np.minimum(tx, ty) * res
    if noise_std > 0.0:
        if rng is None:
            raise ValueError("lidar noise requires an rng")
        ranges = ranges + rng.normal(0.0, noise_std, size=N_BEAMS)
    return np.clip(ranges, RANGE_MIN, RANGE_MAX)

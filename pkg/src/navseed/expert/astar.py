from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..sim.world import WorldMap

SQRT2 = math.sqrt(2.0)
_MOVES = (
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
)


class NoPathError(RuntimeError):
    pass


@dataclass(frozen=True)
class PlannedPath:
    waypoints: list[tuple[float, float]]
    cells: list[tuple[int, int]]
    total_length: float


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def neighbors(free: np.ndarray, i: int, j: int):
    """8-connected moves; a diagonal move requires both side cells to be free."""
    h, w = free.shape
    for di, dj, cost in _MOVES:
        ni, nj = i + di, j + dj
        if not (0 <= ni < w and 0 <= nj < h) or not free[nj, ni]:
            continue
        if di and dj and not (free[j, ni] and free[nj, i]):
            continue
        yield ni, nj, cost


def grid_astar(free: np.ndarray, start: tuple[int, int], goal: tuple[int, int]) -> tuple[list[tuple[int, int]], float]:
    """Optimal 8-connected path on a boolean free-space grid indexed ``[j, i]``.

    Returns the cell sequence and its cost in cell lengths.
    """
    for name, (i, j) in (("start", start), ("goal", goal)):
        if not (0 <= j < free.shape[0] and 0 <= i < free.shape[1]) or not free[j, i]:
            raise NoPathError(f"{name} cell {(i, j)} is blocked")
    if start == goal:
        return [start], 0.0
    g = {start: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed = set()
    counter = 0
    heap = [(octile(start, goal), counter, start)]
    while heap:
        _, _, cur = heapq.heappop(heap)
        if cur in closed:
            continue
        if cur == goal:
            path = [cur]
            while cur in parent:
                cur = parent[cur]
                path.append(cur)
            return path[::-1], g[goal]
        closed.add(cur)
        gc = g[cur]
        for ni, nj, cost in neighbors(free, cur[0], cur[1]):
            nxt = (ni, nj)
            if nxt in closed:
                continue
            ng = gc + cost
            if ng < g.get(nxt, math.inf):
                g[nxt] = ng
                parent[nxt] = cur
                counter += 1
                heapq.heappush(heap, (ng + octile(nxt, goal), counter, nxt))
    raise NoPathError(f"goal {goal} unreachable from {start}")


def inflated_free(world: WorldMap, inflate_radius: float) -> np.ndarray:
    return world.clearance_mask(inflate_radius)


def nearest_free_cell(free: np.ndarray, cell: tuple[int, int], max_radius: int = 10) -> tuple[int, int]:
    """Closest free cell by BFS, for replanning from a pose inside the inflation band."""
    h, w = free.shape
    i, j = cell
    if 0 <= i < w and 0 <= j < h and free[j, i]:
        return cell
    seen = {cell}
    queue = deque([(cell, 0)])
    while queue:
        (ci, cj), depth = queue.popleft()
        if depth > max_radius:
            break
        for di, dj, _ in _MOVES:
            n = (ci + di, cj + dj)
            if n in seen or not (0 <= n[0] < w and 0 <= n[1] < h):
                continue
            if free[n[1], n[0]]:
                return n
            seen.add(n)
            queue.append((n, depth + 1))
    raise NoPathError(f"no free cell near {cell}")


def astar_plan(world: WorldMap, start: tuple[float, float], goal: tuple[float, float], inflate_radius: float, snap_start: bool = False) -> PlannedPath:
    free = inflated_free(world, inflate_radius)
    s = world.cell_of(*start)
    gcell = world.cell_of(*goal)
    if snap_start:
        s = nearest_free_cell(free, s)
    cells, _ = grid_astar(free, s, gcell)
    pts = [world.cell_center(i, j) for i, j in cells]
    length = sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))
    return PlannedPath(pts, cells, length)

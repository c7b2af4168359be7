"""Occupancy-grid worlds and the ``navmap v1`` text format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import numpy as np
from scipy import ndimage


class MapFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InfeasibleError(RuntimeError):
    """No location satisfies the requested clearance."""


BUILTIN_MAPS = ("corridor", "house", "office", "maze")


@dataclass(frozen=True, eq=False)
class WorldMap:
    """Static occupancy grid.

    ``cells[j, i]`` covers ``x in [ox + i*res, ox + (i+1)*res)`` and
    ``y in [oy + j*res, oy + (j+1)*res)``; row 0 is the bottom of the world.
    """

    width_cells: int
    height_cells: int
    resolution: float
    cells: np.ndarray
    origin: tuple[float, float] = (0.0, 0.0)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.width_cells <= 0 or self.height_cells <= 0:
            raise ValueError("map dimensions must be positive")
        if not self.resolution > 0:
            raise ValueError("resolution must be > 0")
        cells = np.asarray(self.cells, dtype=bool)
        if cells.shape != (self.height_cells, self.width_cells):
            raise ValueError(
                f"cells shape {cells.shape} != ({self.height_cells}, {self.width_cells})"
            )
        if not (cells[0].all() and cells[-1].all() and cells[:, 0].all() and cells[:, -1].all()):
            raise ValueError("map boundary must be fully occupied")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def extent(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        return ox, oy, ox + self.width_cells * self.resolution, oy + self.height_cells * self.resolution

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """(i, j) index of the cell containing a world point."""
        ox, oy = self.origin
        return int(math.floor((x - ox) / self.resolution)), int(math.floor((y - oy) / self.resolution))

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        ox, oy = self.origin
        return ox + (i + 0.5) * self.resolution, oy + (j + 0.5) * self.resolution

    def occupied_at(self, x: float, y: float) -> bool:
        i, j = self.cell_of(x, y)
        if not (0 <= i < self.width_cells and 0 <= j < self.height_cells):
            return True
        return bool(self.cells[j, i])

    @cached_property
    def _center_distance(self) -> np.ndarray:
        # distance (in cells) from each cell centre to the nearest occupied cell centre
        return ndimage.distance_transform_edt(~self.cells)

    def clearance_mask(self, min_clearance: float) -> np.ndarray:
        """Cells whose centre is at least ``min_clearance`` from every occupied cell.

        Clearance is measured to the occupied square itself, matching
        :func:`check_collision`.
        """
        cache = self.__dict__.setdefault("_mask_cache", {})
        key = round(float(min_clearance), 9)
        if key in cache:
            return cache[key]
        res = self.resolution
        d = self._center_distance
        # exact point-to-square distance lies in [d - sqrt(2)/2, d - 1/2] cells
        sure = (d - math.sqrt(0.5)) * res >= min_clearance
        maybe = ~sure & ((d - 0.5) * res >= min_clearance) & ~self.cells
        mask = sure & ~self.cells
        for j, i in zip(*np.nonzero(maybe)):
            x, y = self.cell_center(i, j)
            mask[j, i] = not check_collision(self, x, y, min_clearance)
        mask.setflags(write=False)
        cache[key] = mask
        return mask


def check_collision(world: WorldMap, x: float, y: float, radius: float) -> bool:
    """True iff any occupied cell intersects the open disc of ``radius`` around (x, y)."""
    if not radius > 0:
        raise ValueError("radius must be > 0")
    res = world.resolution
    ox, oy = world.origin
    gx, gy = (x - ox) / res, (y - oy) / res
    r = radius / res
    i0 = max(int(math.floor(gx - r)), 0)
    i1 = min(int(math.floor(gx + r)), world.width_cells - 1)
    j0 = max(int(math.floor(gy - r)), 0)
    j1 = min(int(math.floor(gy + r)), world.height_cells - 1)
    if i0 > i1 or j0 > j1:
        return True
    block = world.cells[j0 : j1 + 1, i0 : i1 + 1]
    if not block.any():
        return False
    ii = np.arange(i0, i1 + 1, dtype=np.float64)
    jj = np.arange(j0, j1 + 1, dtype=np.float64)
    dx = np.maximum(np.maximum(ii - gx, gx - (ii + 1.0)), 0.0)
    dy = np.maximum(np.maximum(jj - gy, gy - (jj + 1.0)), 0.0)
    d2 = dy[:, None] ** 2 + dx[None, :] ** 2
    return bool(np.any(block & (d2 < r * r)))


def sample_free_point(world: WorldMap, rng: np.random.Generator, min_clearance: float) -> tuple[float, float]:
    """Uniformly pick a cell centre whose clearance is at least ``min_clearance``."""
    mask = world.clearance_mask(min_clearance)
    js, iis = np.nonzero(mask)
    if len(js) == 0:
        raise InfeasibleError(f"no free cell with clearance >= {min_clearance} m")
    k = int(rng.integers(len(js)))
    return world.cell_center(int(iis[k]), int(js[k]))


def load_map(text: str, name: str = "") -> WorldMap:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if len(lines) < 3:
        raise MapFormatError(len(lines) + 1, "truncated header")
    if lines[0].strip() != "navmap v1":
        raise MapFormatError(1, f"expected 'navmap v1', got {lines[0]!r}")
    parts = lines[1].split()
    if len(parts) != 2 or parts[0] != "res":
        raise MapFormatError(2, "expected 'res <meters-per-cell>'")
    try:
        res = float(parts[1])
    except ValueError:
        raise MapFormatError(2, f"bad resolution {parts[1]!r}") from None
    if not (res > 0 and math.isfinite(res)):
        raise MapFormatError(2, "resolution must be a positive number")
    parts = lines[2].split()
    if len(parts) != 3 or parts[0] != "size":
        raise MapFormatError(3, "expected 'size <width> <height>'")
    try:
        width, height = int(parts[1]), int(parts[2])
    except ValueError:
        raise MapFormatError(3, "size must be two integers") from None
    if width <= 0 or height <= 0:
        raise MapFormatError(3, "size must be positive")
    rows = lines[3:]
    if len(rows) != height:
        raise MapFormatError(3 + min(len(rows), height) + 1, f"expected {height} rows, got {len(rows)}")
    cells = np.zeros((height, width), dtype=bool)
    for k, row in enumerate(rows):
        lineno = 4 + k
        if len(row) != width:
            raise MapFormatError(lineno, f"ragged row: length {len(row)}, expected {width}")
        bad = set(row) - {"#", "."}
        if bad:
            raise MapFormatError(lineno, f"unknown cell character {sorted(bad)[0]!r}")
        # first text row is the top of the world
        cells[height - 1 - k] = np.frombuffer(row.encode(), dtype=np.uint8) == ord("#")
    for k, row in enumerate(rows):
        if (k in (0, height - 1) and "." in row) or row[0] != "#" or row[-1] != "#":
            raise MapFormatError(4 + k, "open boundary")
    return WorldMap(width, height, res, cells, name=name)


def dump_map(world: WorldMap) -> str:
    out = ["navmap v1", f"res {world.resolution:g}", f"size {world.width_cells} {world.height_cells}"]
    for j in range(world.height_cells - 1, -1, -1):
        out.append("".join("#" if c else "." for c in world.cells[j]))
    return "\n".join(out) + "\n"


def builtin_map(name: str) -> WorldMap:
    if name not in BUILTIN_MAPS:
        raise KeyError(f"unknown map {name!r}; choose from {', '.join(BUILTIN_MAPS)}")
    text = resources.files("navseed.sim").joinpath("maps", f"{name}.map").read_text()
    return load_map(text, name=name)


def resolve_map(name_or_path: str) -> WorldMap:
    if name_or_path in BUILTIN_MAPS:
        return builtin_map(name_or_path)
    with open(name_or_path) as fh:
        return load_map(fh.read(), name=name_or_path)

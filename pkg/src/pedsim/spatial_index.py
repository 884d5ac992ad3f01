"""Uniform hash grid for nearest-neighbour and overlap queries."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolation, InputError

Cell = tuple[int, int]


class UniformGrid:
    """Points bucketed by ``(floor(x / cell), floor(y / cell))``."""

    def __init__(self, cell_size: float):
        if not cell_size > 0:
            raise ContractViolation("cell_size must be positive")
        self.cell_size = float(cell_size)
        self.buckets: dict[Cell, list[int]] = defaultdict(list)
        self.positions: dict[int, tuple[float, float]] = {}

    def __len__(self) -> int:
        return len(self.positions)

    def cell_of(self, pos) -> Cell:
        return (math.floor(pos[0] / self.cell_size), math.floor(pos[1] / self.cell_size))

    def insert(self, pid: int, pos) -> None:
        x, y = float(pos[0]), float(pos[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InputError(f"non-finite position for id {pid}")
        if pid in self.positions:
            raise InputError(f"duplicate id {pid}")
        self.positions[pid] = (x, y)
        self.buckets[self.cell_of((x, y))].append(pid)

    def _ring(self, center: Cell, r: int) -> Iterable[Cell]:
        cx, cy = center
        if r == 0:
            yield center
            return
        for dx in range(-r, r + 1):
            yield (cx + dx, cy - r)
            yield (cx + dx, cy + r)
        for dy in range(-r + 1, r):
            yield (cx - r, cy + dy)
            yield (cx + r, cy + dy)


def build_grid(points: Iterable[tuple[int, Sequence[float]]], cell_size: float) -> UniformGrid:
    grid = UniformGrid(cell_size)
    for pid, pos in points:
        grid.insert(pid, pos)
    return grid


def nearest_k(grid: UniformGrid, query, k: int, exclude: int | None = None) -> list[int]:
    """The ``k`` ids closest to ``query``, ascending by (distance, id).

    Cells are scanned ring by ring around the query cell; the scan stops once
    the k-th best distance is strictly below the distance to any unvisited
    cell, so the answer always equals a full sort.
    """
    if k < 0:
        raise ContractViolation("k must be >= 0")
    total = len(grid) - (1 if exclude in grid.positions else 0)
    if k == 0 or total <= 0:
        return []
    qx, qy = float(query[0]), float(query[1])
    h = grid.cell_size
    center = grid.cell_of((qx, qy))
    found: list[tuple[float, int]] = []
    seen = 0
    r = 0
    while True:
        for cell in grid._ring(center, r):
            for pid in grid.buckets.get(cell, ()):
                if pid == exclude:
                    continue
                px, py = grid.positions[pid]
                found.append((math.hypot(px - qx, py - qy), pid))
                seen += 1
        if seen == total:
            break
        if len(found) >= k:
            found.sort()
            bound = min(
                qx - (center[0] - r) * h,
                (center[0] + r + 1) * h - qx,
                qy - (center[1] - r) * h,
                (center[1] + r + 1) * h - qy,
            )
            # margin absorbs floor() rounding at cell borders
            if found[k - 1][0] < bound - 1e-9 * h:
                break
        r += 1
    found.sort()
    return [pid for _, pid in found[:k]]


def overlapping_pairs(
    grid: UniformGrid,
    positions: Mapping[int, Sequence[float]] | Sequence[Sequence[float]] | None,
    radii: Mapping[int, float] | Sequence[float],
) -> list[tuple[int, int]]:
    """All pairs with center distance below the sum of radii, sorted.

    ``positions`` defaults to the positions stored in the grid.
    """
    if positions is None:
        positions = grid.positions
    ids = list(grid.positions)
    if not ids:
        return []
    r_max = max(radii[i] for i in ids)
    reach = max(1, math.ceil(2.0 * r_max / grid.cell_size))
    pairs = set()
    for (cx, cy), members in grid.buckets.items():
        for dx in range(-reach, reach + 1):
            for dy in range(-reach, reach + 1):
                other = grid.buckets.get((cx + dx, cy + dy))
                if not other:
                    continue
                for i in members:
                    xi, yi = positions[i]
                    for j in other:
                        if j <= i:
                            continue
                        xj, yj = positions[j]
                        if math.hypot(xi - xj, yi - yj) < radii[i] + radii[j]:
                            pairs.add((i, j))
    return sorted(pairs)

"""Hash-grid neighbour search against a full sort.

The grid answers k-nearest and overlap queries by scanning cells ring by
ring; the answers are exactly what sorting all points would give.
"""

import math
import random
import time

from pedsim.spatial_index import build_grid, nearest_k, overlapping_pairs

rng = random.Random(3)
points = {pid: (rng.uniform(0, 10), rng.uniform(0, 10)) for pid in range(500)}
radii = {pid: 0.15 for pid in points}
grid = build_grid(points.items(), cell_size=0.8)
print(f"{len(grid)} points in {len(grid.buckets)} cells")

query = points[0]
started = time.perf_counter()
fast = nearest_k(grid, query, 5, exclude=0)
t_grid = time.perf_counter() - started
started = time.perf_counter()
slow = sorted((math.dist(p, query), pid) for pid, p in points.items() if pid != 0)[:5]
t_sort = time.perf_counter() - started
print("5 nearest to point 0:", fast)
print("same as a full sort:", fast == [pid for _, pid in slow], f"({t_grid * 1e6:.0f} us vs {t_sort * 1e6:.0f} us)")

pairs = overlapping_pairs(grid, None, radii)
print(f"{len(pairs)} overlapping pairs, first few: {pairs[:4]}")

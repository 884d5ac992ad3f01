"""Bottleneck geometry, the initial crowd and routing.

Walkers start at rest in a block upstream of the opening and head for the
nearest point of the opening they can pass through without touching its
edges.
"""

from pedsim.forces import PedestrianState
from pedsim.params import builtin_parameter_set
from pedsim.scenario import build_bottleneck_scenario, desired_direction, spawn_pedestrians

s = build_bottleneck_scenario(0.6)
print(f"opening {s.opening_segment}, measured at x={s.measurement_line}, removed at x={s.removal_line}")
print("walls:")
for w in s.walls:
    print(f"  {w.a} -> {w.b}  walkable side {w.outward_side}")
r = s.spawn_region
print(f"spawn block x in [{r.x_min:.2f}, {r.x_max:.2f}], y in [{r.y_min}, {r.y_max}]")

crowd = spawn_pedestrians(s, 100, builtin_parameter_set("P0"), seed=1)
xs = [q.position[0] for q in crowd]
print(f"{len(crowd)} walkers spawned between x={min(xs):.2f} and x={max(xs):.2f}")

for pos in ((-2.5, 0.0), (-2.5, 1.5), (-0.3, 0.8), (0.2, 0.0)):
    e = desired_direction(PedestrianState(0, pos, (0, 0), 1.34, 0.15), s)
    print(f"walker at {pos} heads {e.round(3)}")

"""Force kernels on hand-sized examples.

Two pedestrians half a metre apart, both at rest, one walking toward +x.
Each kernel is evaluated separately and then superposed.
"""

import math

import numpy as np

from pedsim.forces import (
    PedestrianState,
    WallSegment,
    anisotropy_weight,
    social_iso_force,
    social_mean_force,
    total_acceleration,
    wall_force,
)
from pedsim.params import builtin_parameter_set

p = builtin_parameter_set("P0")
me = PedestrianState(0, (0.0, 0.0), (0.0, 0.0), 1.34, 0.15)
ahead = PedestrianState(1, (0.5, 0.0), (0.0, 0.0), 1.34, 0.15)

print("anisotropy weight ahead / beside / behind:",
      [round(anisotropy_weight(phi, p.lambda_anisotropy), 3) for phi in (0, math.pi / 2, math.pi)])
print("isotropic push from the walker ahead:", social_iso_force(me, ahead, p))
print("long-range push from the walker ahead:", social_mean_force(me, ahead, p))

fb = total_acceleration(me, [me, ahead], [], (1.0, 0.0), p)
print("\nbreakdown for the rear walker:")
for name in ("driving", "social_mean", "social_iso", "contact", "side_bias", "total"):
    print(f"  {name:12s} {np.round(getattr(fb, name), 6)}")

# the long-range term reaches further ahead than sideways
for where in ((1.0, 0.0), (0.0, 1.0)):
    other = PedestrianState(1, where, (0.0, 0.0), 1.34, 0.15)
    print(f"long-range push from {where}: |f| = {np.linalg.norm(social_mean_force(me, other, p)):.4f}")

wall = WallSegment((-1.0, 0.2), (1.0, 0.2))
print("\ncontact with a wall 0.1 m away from a body of radius 0.15:",
      wall_force(PedestrianState(0, (0.0, 0.1), (0, 0), 1.34, 0.15), wall, p))

"""One crowd of 100 through one bottleneck.

The run ends when the last walker has crossed the exit plane of the
bottleneck.  Passage times give total time, flux and specific flux.
"""

from pedsim.engine import run
from pedsim.measurement import flow_record
from pedsim.params import builtin_parameter_set
from pedsim.scenario import build_bottleneck_scenario

for width in (0.5, 1.0):
    result = run(build_bottleneck_scenario(width), builtin_parameter_set("P0"), 100, seed=1,
                 parameter_set="P0", invariants=True)
    rec = flow_record(result, 0)
    times = result.passage_times
    print(f"width {width} m: first passage {times[0]:.2f} s, last {times[-1]:.2f} s, "
          f"{result.steps} steps in {result.wall_clock:.2f} s wall time")
    print(f"  flux {rec.flux:.3f} 1/s, specific flux {rec.specific_flux:.3f} 1/(m s), "
          f"invariant violations {result.invariants.total}")

# identical inputs give identical passage times
a = run(build_bottleneck_scenario(0.7), builtin_parameter_set("P3"), 50, seed=8)
b = run(build_bottleneck_scenario(0.7), builtin_parameter_set("P3"), 50, seed=8)
print("repeat run identical:", a.passage_times == b.passage_times)

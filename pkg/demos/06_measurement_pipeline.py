"""From passage times to fluxes, fits and comparisons.

Uses made-up measurements so every number can be checked by hand.
"""

from pedsim.harness import ExperimentRow, compare_with_experiments
from pedsim.measurement import (
    FlowRecord,
    aggregate,
    flux,
    linear_fit,
    scale_total_time,
    specific_flux,
    specific_flux_minimum,
)

print("99 gaps in 55 s:", flux(100, 55.0), "1/s")
print("same flux through 0.9 m:", specific_flux(flux(100, 55.0), 0.9), "1/(m s)")
print("60 s for 80 people, as if 100 had walked:", round(scale_total_time(60.0, 80), 4), "s")

records = []
for width, times in ((0.5, (70.0, 74.0)), (0.7, (52.0, 55.0)), (1.0, (40.0, 41.0))):
    for rep, t in enumerate(times):
        j = flux(100, t)
        records.append(FlowRecord("P0", width, rep, rep + 1, 100, t, j, specific_flux(j, width)))
rows = aggregate(records)
for a in rows:
    print(f"width {a.width}: mean T {a.mean_total_time:.1f} s (sd {a.std_total_time:.2f}), "
          f"mean flux {a.mean_flux:.3f}, specific {a.mean_specific_flux:.3f}")

slope, intercept, r2 = linear_fit([(a.width, a.mean_flux) for a in rows])
print(f"flux ~ width: slope {slope:.3f}, intercept {intercept:.3f}, r2 {r2:.4f}")
print("interior specific-flux minimum:", specific_flux_minimum([(a.width, a.mean_specific_flux) for a in rows]))

lab = [ExperimentRow("lab", 0.7, 80, 45.0), ExperimentRow("lab", 0.7, 100, 50.0)]
for c in compare_with_experiments(rows, lab):
    print(f"width {c.width}: simulated {c.simulated_total_time:.1f} s vs measured "
          f"[{c.experiment_min:.1f}, {c.experiment_max:.1f}] -> {c.flag}")

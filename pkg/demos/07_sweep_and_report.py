"""A reduced sweep and its report.

Three parameter sets, three widths and three replications of 100 walkers,
written to CSV, read back and summarised.  ``pedsim sweep`` and
``pedsim analyze`` do the same for the full 8 x 6 x 10 matrix.
"""

import tempfile
from pathlib import Path

from pedsim.harness import SweepConfig, read_results, render_report, run_matrix, scaling_report, write_results
from pedsim.measurement import aggregate

cfg = SweepConfig(sets=("P0", "P3", "P6"), widths=(0.5, 0.7, 1.0), replications=3)
print(f"{len(cfg.cells())} runs, seeds {cfg.cells()[0][3]} .. {cfg.cells()[-1][3]}")
records = run_matrix(cfg, progress=lambda k, total, r: print(f"\r{k}/{total}", end="", flush=True))
print()

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "results.csv"
    write_results(path, records)
    back = read_results(path)
    print("CSV round trip lossless:", back == records)

rows = aggregate(records)
print()
print(render_report(records, rows))
for e in scaling_report(rows).entries:
    print(f"{e.parameter_set}: flux is {e.mean_ratio:.2f} x P0 (cv {e.cv:.3f})")

"""Turning passage times into totals, fluxes and per-width summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import groupby
from typing import Iterable, Sequence

from .engine import RunResult
from .errors import ContractViolation, DegenerateFitError, IncompleteRunError, InputError, UndefinedFluxError

# Crowd size every total time is normalised to.
REFERENCE_CROWD = 100

FLUX_DEFINITIONS = ("gaps", "n_over_t")


@dataclass(frozen=True)
class FlowRecord:
    parameter_set: str
    width: float
    replication: int
    seed: int
    n: int
    total_time: float
    flux: float
    specific_flux: float
    completed: bool = True

    def __post_init__(self):
        if self.completed:
            if not self.total_time > 0:
                raise ContractViolation("total_time must be positive")
            if abs(self.specific_flux - self.flux / self.width) > 1e-12:
                raise ContractViolation("specific_flux must equal flux / width")


@dataclass(frozen=True)
class AggregateRow:
    parameter_set: str
    width: float
    n_reps: int
    mean_total_time: float
    std_total_time: float
    mean_flux: float
    std_flux: float
    mean_specific_flux: float
    std_specific_flux: float


def total_time(r: RunResult) -> float:
    """Time from the start signal until the last pedestrian passed."""
    if not r.completed or not r.passage_times:
        raise IncompleteRunError(
            f"run (set={r.parameter_set}, width={r.width}, seed={r.seed}) did not finish: "
            f"{len(r.passage_times)} of {r.n_pedestrians} passed"
        )
    return max(r.passage_times)


def flux(n: int, total_time: float, definition: str = "gaps") -> float:
    """Throughput.  ``"gaps"`` counts the n-1 time gaps between n walkers."""
    if definition not in FLUX_DEFINITIONS:
        raise InputError(f"unknown flux definition {definition!r}")
    if n < 2:
        raise UndefinedFluxError(f"flux needs at least two pedestrians (got {n})")
    if not total_time > 0:
        raise InputError("total_time must be positive")
    return (n - 1 if definition == "gaps" else n) / total_time


def specific_flux(j: float, width: float) -> float:
    if not width > 0:
        raise InputError(f"width must be positive (got {width})")
    return j / width


def scale_total_time(t: float, n_participants: int) -> float:
    """Rescale a measured total time as if REFERENCE_CROWD people had taken part."""
    if n_participants < 2:
        raise InputError(f"need at least two participants to rescale (got {n_participants})")
    if n_participants == REFERENCE_CROWD:
        return t
    return t * (REFERENCE_CROWD - 1) / (n_participants - 1)


def flow_record(
    r: RunResult, replication: int, parameter_set: str | None = None, definition: str = "gaps"
) -> FlowRecord:
    """FlowRecord for one run; a jammed run yields a NaN-filled sentinel."""
    pset = parameter_set if parameter_set is not None else (r.parameter_set or "")
    if not r.completed:
        nan = math.nan
        return FlowRecord(pset, r.width, replication, r.seed, r.n_pedestrians, nan, nan, nan, completed=False)
    t = total_time(r)
    j = flux(r.n_pedestrians, t, definition)
    return FlowRecord(pset, r.width, replication, r.seed, r.n_pedestrians, t, j, specific_flux(j, r.width))


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    if n == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate(records: Iterable[FlowRecord]) -> list[AggregateRow]:
    """Mean and sample std per (set, width), over completed runs only."""
    done = [r for r in records if r.completed]
    done.sort(key=lambda r: (r.parameter_set, r.width, r.replication))
    rows = []
    for (pset, width), group in groupby(done, key=lambda r: (r.parameter_set, r.width)):
        group = list(group)
        mt, st = _mean_std([r.total_time for r in group])
        mj, sj = _mean_std([r.flux for r in group])
        ms, ss = _mean_std([r.specific_flux for r in group])
        rows.append(AggregateRow(pset, width, len(group), mt, st, mj, sj, ms, ss))
    return rows


def linear_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float, float]:
    """Ordinary least squares ``y = slope * x + intercept`` and its r²."""
    if len(points) < 2:
        raise DegenerateFitError("need at least two points")
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateFitError("all widths are equal")
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_tot = math.fsum((y - my) ** 2 for y in ys)
    if ss_tot == 0.0:
        return slope, intercept, 1.0
    ss_res = math.fsum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 - ss_res / ss_tot
    return slope, intercept, min(1.0, max(0.0, r2))


def specific_flux_minimum(series: Sequence[tuple[float, float]]) -> float | None:
    """Width of the deepest interior strict local minimum, or None."""
    if len(series) < 3:
        raise InputError("need at least three points to locate an interior minimum")
    best = None
    for k in range(1, len(series) - 1):
        w, v = series[k]
        if v < series[k - 1][1] and v < series[k + 1][1]:
            if best is None or v < best[1]:
                best = (w, v)
    return None if best is None else best[0]

"""Experiment matrix, CSV files and the analysis report.

Every CSV written here uses ``\\n`` line endings and the shortest
round-trip decimal form of each float, so identical inputs always give
byte-identical files and every file reads back exactly.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from .engine import DEFAULT_DT, DEFAULT_T_MAX, RunResult, run
from .errors import ConfigurationError, InputError, ParseError
from .measurement import (
    AggregateRow,
    FlowRecord,
    aggregate,
    flow_record,
    flux,
    linear_fit,
    scale_total_time,
    specific_flux,
    specific_flux_minimum,
)
from .params import ParameterSetId, builtin_parameter_set
from .scenario import GeometryConfig, build_bottleneck_scenario

log = logging.getLogger(__name__)

DEFAULT_WIDTHS = (0.4, 0.5, 0.6, 0.7, 0.8, 1.0)
ALL_SETS = tuple(s.value for s in ParameterSetId)
REFERENCE_SET = "P0"

RESULTS_HEADER = (
    "param_set,width_m,replication,seed,n_pedestrians,completed,total_time_s,flux_per_s,specific_flux_per_m_s"
)
SUMMARY_HEADER = (
    "param_set,width_m,n_reps,mean_total_time_s,std_total_time_s,mean_flux_per_s,std_flux_per_s,"
    "mean_specific_flux_per_m_s,std_specific_flux_per_m_s"
)
TRAJ_HEADER = "t_s,ped_id,x_m,y_m,vx_m_s,vy_m_s"
EXPERIMENTS_HEADER = "source,width_m,n_participants,total_time_s"


def fmt(x: float | int) -> str:
    """Shortest decimal that reads back to the same float; NaN as empty."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if math.isnan(x):
        return ""
    return repr(float(x))


def seed_for(base_seed: int, set_index: int, width_index: int, replication: int) -> int:
    return base_seed + 10000 * set_index + 100 * width_index + replication


@dataclass(frozen=True)
class SweepConfig:
    sets: tuple[str, ...] = ALL_SETS
    widths: tuple[float, ...] = DEFAULT_WIDTHS
    replications: int = 10
    base_seed: int = 1
    n: int = 100
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(ParameterSetId(s).value for s in self.sets))
        object.__setattr__(self, "widths", tuple(float(w) for w in self.widths))
        if not self.sets:
            raise ConfigurationError("at least one parameter set is required")
        if len(set(self.sets)) != len(self.sets):
            raise ConfigurationError("parameter sets must not repeat")
        if not self.widths or any(not w > 0 for w in self.widths):
            raise ConfigurationError("widths must be positive")
        if any(b <= a for a, b in zip(self.widths, self.widths[1:])):
            raise ConfigurationError("widths must be strictly ascending")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if self.n < 2:
            raise ConfigurationError("n must be >= 2")
        if self.base_seed < 0:
            raise ConfigurationError("base_seed must be >= 0")
        if not (self.dt > 0 and self.t_max > 0):
            raise ConfigurationError("dt and t_max must be positive")

    def cells(self) -> list[tuple[str, float, int, int]]:
        """``(set, width, replication, seed)`` in output order."""
        out = []
        for s in self.sets:
            s_idx = ParameterSetId(s).index
            for w_idx, w in enumerate(self.widths):
                for rep in range(self.replications):
                    out.append((s, w, rep, seed_for(self.base_seed, s_idx, w_idx, rep)))
        return out


@dataclass(frozen=True)
class _Cell:
    parameter_set: str
    width: float
    replication: int
    seed: int
    n: int
    dt: float
    t_max: float
    geometry: GeometryConfig
    invariants: bool


def _run_cell(cell: _Cell) -> RunResult:
    scenario = build_bottleneck_scenario(cell.width, cell.geometry, n=cell.n)
    return run(
        scenario,
        builtin_parameter_set(cell.parameter_set),
        cell.n,
        cell.seed,
        dt=cell.dt,
        t_max=cell.t_max,
        parameter_set=cell.parameter_set,
        invariants=cell.invariants,
    )


def iter_matrix(cfg: SweepConfig, jobs: int = 1, invariants: bool = False) -> Iterator[tuple[int, RunResult]]:
    """Yield ``(replication, RunResult)`` in (set, width, replication) order.

    With ``jobs > 1`` runs execute in worker processes; results are still
    yielded in matrix order, so output never depends on the worker count.
    """
    cells = [
        _Cell(s, w, rep, seed, cfg.n, cfg.dt, cfg.t_max, cfg.geometry, invariants)
        for s, w, rep, seed in cfg.cells()
    ]
    if jobs < 1:
        raise ConfigurationError("jobs must be >= 1")
    if jobs == 1 or len(cells) == 1:
        for c in cells:
            yield c.replication, _run_cell(c)
        return
    with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
        for c, result in zip(cells, pool.map(_run_cell, cells, chunksize=1)):
            yield c.replication, result


def run_matrix(
    cfg: SweepConfig,
    jobs: int = 1,
    progress: Callable[[int, int, RunResult], None] | None = None,
) -> list[FlowRecord]:
    """One FlowRecord per matrix cell; jammed runs become sentinel rows."""
    total = len(cfg.cells())
    records = []
    for k, (rep, result) in enumerate(iter_matrix(cfg, jobs), start=1):
        records.append(flow_record(result, rep))
        if progress is not None:
            progress(k, total, result)
    jammed = sum(not r.completed for r in records)
    if jammed:
        log.warning("%d of %d runs did not finish within t_max", jammed, total)
    return records


# ---------------------------------------------------------------- CSV I/O


def _write_text(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


def results_csv(records: Iterable[FlowRecord]) -> str:
    lines = [RESULTS_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    r.parameter_set,
                    fmt(r.width),
                    str(r.replication),
                    str(r.seed),
                    str(r.n),
                    fmt(bool(r.completed)),
                    fmt(r.total_time),
                    fmt(r.flux),
                    fmt(r.specific_flux),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def summary_csv(rows: Iterable[AggregateRow]) -> str:
    lines = [SUMMARY_HEADER]
    for a in rows:
        lines.append(
            ",".join(
                [
                    a.parameter_set,
                    fmt(a.width),
                    str(a.n_reps),
                    fmt(a.mean_total_time),
                    fmt(a.std_total_time),
                    fmt(a.mean_flux),
                    fmt(a.std_flux),
                    fmt(a.mean_specific_flux),
                    fmt(a.std_specific_flux),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_results(path, records: Iterable[FlowRecord]) -> None:
    _write_text(path, results_csv(records))


def write_summary(path, rows: Iterable[AggregateRow]) -> None:
    _write_text(path, summary_csv(rows))


class TrajectoryWriter:
    """Per-step hook for :func:`pedsim.engine.run` writing traj.csv rows."""

    def __init__(self, fh):
        self.fh = fh
        fh.write(TRAJ_HEADER + "\n")

    def __call__(self, t, ids, pos, vel) -> None:
        t = fmt(float(t))
        for k in ids:
            k = int(k)
            self.fh.write(
                f"{t},{k},{fmt(float(pos[k, 0]))},{fmt(float(pos[k, 1]))},"
                f"{fmt(float(vel[k, 0]))},{fmt(float(vel[k, 1]))}\n"
            )


def _rows(text: str, header: str, path_label: str) -> Iterator[tuple[int, list[str]]]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(f"{path_label}: empty file, expected header {header!r}", 1)
    if lines[0].rstrip("\r") != header:
        raise ParseError(f"{path_label}: bad header {lines[0]!r}, expected {header!r}", 1)
    width = header.count(",") + 1
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        cells = next(csv.reader(io.StringIO(line)))
        if len(cells) != width:
            raise ParseError(f"{path_label}: expected {width} fields, found {len(cells)}", lineno)
        yield lineno, cells


def _float(s: str, name: str, lineno: int, allow_empty: bool = False) -> float:
    if s == "" and allow_empty:
        return math.nan
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"{name}: not a number: {s!r}", lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"{name}: not finite: {s!r}", lineno)
    return v


def _int(s: str, name: str, lineno: int) -> int:
    try:
        return int(s)
    except ValueError:
        raise ParseError(f"{name}: not an integer: {s!r}", lineno) from None


def _bool(s: str, name: str, lineno: int) -> bool:
    if s in ("true", "false"):
        return s == "true"
    raise ParseError(f"{name}: expected true or false, got {s!r}", lineno)


def parse_results(text: str, label: str = "results") -> list[FlowRecord]:
    out = []
    for lineno, c in _rows(text, RESULTS_HEADER, label):
        done = _bool(c[5], "completed", lineno)
        t = _float(c[6], "total_time_s", lineno, allow_empty=not done)
        j = _float(c[7], "flux_per_s", lineno, allow_empty=not done)
        js = _float(c[8], "specific_flux_per_m_s", lineno, allow_empty=not done)
        try:
            pset = ParameterSetId(c[0]).value
        except ValueError:
            raise ParseError(f"unknown parameter set {c[0]!r}", lineno) from None
        try:
            rec = FlowRecord(
                pset,
                _float(c[1], "width_m", lineno),
                _int(c[2], "replication", lineno),
                _int(c[3], "seed", lineno),
                _int(c[4], "n_pedestrians", lineno),
                t,
                j,
                js,
                completed=done,
            )
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        out.append(rec)
    return out


def parse_summary(text: str, label: str = "summary") -> list[AggregateRow]:
    out = []
    for lineno, c in _rows(text, SUMMARY_HEADER, label):
        vals = [_float(x, "value", lineno) for x in (c[1], *c[3:])]
        out.append(AggregateRow(c[0], vals[0], _int(c[2], "n_reps", lineno), *vals[1:]))
    return out


@dataclass(frozen=True)
class ExperimentRow:
    source: str
    width: float
    n_participants: int
    total_time: float


def parse_experiments(text: str, label: str = "experiments") -> list[ExperimentRow]:
    if not text.strip():
        return []
    out = []
    for lineno, c in _rows(text, EXPERIMENTS_HEADER, label):
        w = _float(c[1], "width_m", lineno)
        n = _int(c[2], "n_participants", lineno)
        t = _float(c[3], "total_time_s", lineno)
        if not w > 0:
            raise ParseError("width_m must be positive", lineno)
        if n < 2:
            raise ParseError("n_participants must be >= 2", lineno)
        if not t > 0:
            raise ParseError("total_time_s must be positive", lineno)
        out.append(ExperimentRow(c[0], w, n, t))
    return out


def read_results(path) -> list[FlowRecord]:
    return parse_results(Path(path).read_text(encoding="utf-8"), str(path))


def read_summary(path) -> list[AggregateRow]:
    return parse_summary(Path(path).read_text(encoding="utf-8"), str(path))


def read_experiments(path) -> list[ExperimentRow]:
    return parse_experiments(Path(path).read_text(encoding="utf-8"), str(path))


# ---------------------------------------------------------------- analysis


def recompute_flux(records: Sequence[FlowRecord], definition: str) -> list[FlowRecord]:
    """Same records with flux columns re-derived under ``definition``."""
    out = []
    for r in records:
        if not r.completed:
            out.append(r)
            continue
        j = flux(r.n, r.total_time, definition)
        out.append(replace(r, flux=j, specific_flux=specific_flux(j, r.width)))
    return out


@dataclass(frozen=True)
class ScalingEntry:
    parameter_set: str
    widths: tuple[float, ...]
    ratios: tuple[float, ...]
    mean_ratio: float
    cv: float


@dataclass(frozen=True)
class ScalingReport:
    reference: str
    entries: tuple[ScalingEntry, ...]

    def entry(self, parameter_set: str) -> ScalingEntry:
        for e in self.entries:
            if e.parameter_set == parameter_set:
                return e
        raise KeyError(parameter_set)


def _mean_flux_by_cell(rows: Iterable[AggregateRow | FlowRecord]) -> dict[tuple[str, float], float]:
    rows = list(rows)
    if rows and isinstance(rows[0], FlowRecord):
        rows = aggregate(rows)
    return {(a.parameter_set, a.width): a.mean_flux for a in rows}


def scaling_report(rows: Iterable[AggregateRow | FlowRecord], reference: str = REFERENCE_SET) -> ScalingReport:
    """Flux of every other set relative to ``reference``, width by width.

    CV uses the sample standard deviation of the ratios; a single width
    gives CV 0.
    """
    reference = ParameterSetId(reference).value
    means = _mean_flux_by_cell(rows)
    sets = sorted({s for s, _ in means} - {reference})
    entries = []
    for s in sets:
        widths = sorted(w for ss, w in means if ss == s)
        ratios = []
        for w in widths:
            if (reference, w) not in means:
                raise InputError(f"reference set {reference} has no completed runs at width {w}")
            ratios.append(means[(s, w)] / means[(reference, w)])
        mean = math.fsum(ratios) / len(ratios)
        if len(ratios) > 1:
            std = math.sqrt(math.fsum((r - mean) ** 2 for r in ratios) / (len(ratios) - 1))
        else:
            std = 0.0
        entries.append(ScalingEntry(s, tuple(widths), tuple(ratios), mean, std / mean))
    return ScalingReport(reference, tuple(entries))


@dataclass(frozen=True)
class ComparisonRow:
    parameter_set: str
    width: float
    simulated_total_time: float
    experiment_min: float
    experiment_max: float
    n_experiments: int

    @property
    def inside(self) -> bool:
        return self.experiment_min <= self.simulated_total_time <= self.experiment_max

    @property
    def flag(self) -> str:
        return "inside" if self.inside else "outside"


def compare_with_experiments(
    summary: Sequence[AggregateRow], experiments: Sequence[ExperimentRow]
) -> list[ComparisonRow]:
    """Simulated mean total times against the range of rescaled measurements."""
    if not experiments:
        log.warning("no experimental rows to compare against")
        return []
    scaled: dict[float, list[float]] = {}
    for e in experiments:
        scaled.setdefault(e.width, []).append(scale_total_time(e.total_time, e.n_participants))
    out = []
    for a in summary:
        if a.width in scaled:
            vals = scaled[a.width]
            out.append(ComparisonRow(a.parameter_set, a.width, a.mean_total_time, min(vals), max(vals), len(vals)))
    return out


def render_report(
    records: Sequence[FlowRecord],
    summary: Sequence[AggregateRow],
    comparison: Sequence[ComparisonRow] | None = None,
    flux_definition: str = "gaps",
) -> str:
    lines = [f"flux definition: {flux_definition}"]
    jammed = [r for r in records if not r.completed]
    lines.append(f"runs: {len(records)}  incomplete (excluded from statistics): {len(jammed)}")
    for r in jammed:
        lines.append(f"  incomplete: set={r.parameter_set} width={fmt(r.width)} rep={r.replication} seed={r.seed}")
    lines.append("")

    by_set: dict[str, list[AggregateRow]] = {}
    for a in summary:
        by_set.setdefault(a.parameter_set, []).append(a)
    scaling = None
    if REFERENCE_SET in by_set and len(by_set) > 1:
        try:
            scaling = scaling_report(summary, REFERENCE_SET)
        except InputError as exc:
            lines.append(f"scaling report unavailable: {exc}")
    for s in sorted(by_set):
        rows = sorted(by_set[s], key=lambda a: a.width)
        lines.append(f"[{s}]")
        if len({a.width for a in rows}) >= 2:
            slope, intercept, r2 = linear_fit([(a.width, a.mean_flux) for a in rows])
            lines.append(f"  linear fit flux~width: slope={slope:.6g} intercept={intercept:.6g} r2={r2:.6g}")
        else:
            lines.append("  linear fit flux~width: n/a (fewer than two widths)")
        if len(rows) >= 3:
            m = specific_flux_minimum([(a.width, a.mean_specific_flux) for a in rows])
            lines.append(f"  specific flux minimum: {'none' if m is None else fmt(m)}")
        else:
            lines.append("  specific flux minimum: n/a (fewer than three widths)")
        if scaling is not None and s != REFERENCE_SET:
            e = scaling.entry(s)
            ratios = " ".join(f"{fmt(w)}:{r:.4f}" for w, r in zip(e.widths, e.ratios))
            lines.append(f"  flux ratio vs {REFERENCE_SET}: mean={e.mean_ratio:.4f} cv={e.cv:.4f} [{ratios}]")
        lines.append("")
    if comparison is not None:
        lines.append("comparison with experiments (total times rescaled to 100 participants):")
        if not comparison:
            lines.append("  no matching widths")
        for c in comparison:
            lines.append(
                f"  {c.parameter_set} width={fmt(c.width)} simulated={c.simulated_total_time:.3f} "
                f"experiments=[{c.experiment_min:.3f}, {c.experiment_max:.3f}] n={c.n_experiments} {c.flag}"
            )
    return "\n".join(lines).rstrip("\n") + "\n"

"""``pedsim`` command line: params, run, sweep, analyze.

Exit codes: 0 success, 1 usage error, 2 input or parse error,
3 simulation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .engine import DEFAULT_DT, DEFAULT_T_MAX, run
from .errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateGeometryError,
    DensityInfeasibleError,
    InputError,
    IntegrationDivergedError,
    ParseError,
)
from .measurement import FLUX_DEFINITIONS, aggregate, flow_record
from .params import ParameterSetId, builtin_parameter_set
from .scenario import GeometryConfig, build_bottleneck_scenario

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_SIM = 0, 1, 2, 3

log = logging.getLogger("pedsim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _set_id(text: str) -> str:
    try:
        return ParameterSetId(text.strip()).value
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown parameter set {text!r} (expected P0..P7)") from None


def _set_list(text: str) -> tuple[str, ...]:
    return tuple(_set_id(s) for s in text.split(",") if s.strip())


def _width_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad width list {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _non_negative_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


_GEOMETRY_FLAGS = (
    "corridor_halfwidth",
    "bottleneck_depth",
    "front_distance",
    "spawn_width",
    "spawn_density",
    "removal_offset",
)


def _add_geometry_flags(p: argparse.ArgumentParser) -> None:
    defaults = GeometryConfig()
    g = p.add_argument_group("geometry")
    for name in _GEOMETRY_FLAGS:
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=_positive_float, default=getattr(defaults, name))


def _geometry(args) -> GeometryConfig:
    return GeometryConfig(**{name: getattr(args, name) for name in _GEOMETRY_FLAGS})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pedsim", description="Social force bottleneck simulator and experiment harness.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("params", help="print a built-in parameter set")
    sp.add_argument("--set", dest="set_id", type=_set_id, required=True)

    sr = sub.add_parser("run", help="simulate one crowd through one bottleneck")
    sr.add_argument("--set", dest="set_id", type=_set_id, required=True)
    sr.add_argument("--width", type=_positive_float, required=True)
    sr.add_argument("--seed", type=_non_negative_int, required=True)
    sr.add_argument("--n", type=int, default=100)
    sr.add_argument("--dt", type=_positive_float, default=DEFAULT_DT)
    sr.add_argument("--t-max", type=_positive_float, default=DEFAULT_T_MAX)
    sr.add_argument("--out", help="write a one-row results CSV")
    sr.add_argument("--traj", help="write per-step trajectories")
    _add_geometry_flags(sr)

    sw = sub.add_parser("sweep", help="run the set x width x replication matrix")
    sw.add_argument("--sets", type=_set_list, default=harness.ALL_SETS)
    sw.add_argument("--widths", type=_width_list, default=harness.DEFAULT_WIDTHS)
    sw.add_argument("--reps", type=int, default=10)
    sw.add_argument("--base-seed", type=_non_negative_int, default=1)
    sw.add_argument("--jobs", type=int, default=1)
    sw.add_argument("--n", type=int, default=100)
    sw.add_argument("--dt", type=_positive_float, default=DEFAULT_DT)
    sw.add_argument("--t-max", type=_positive_float, default=DEFAULT_T_MAX)
    sw.add_argument("--out", required=True)
    sw.add_argument("--quiet", action="store_true", help="no progress lines on stderr")
    _add_geometry_flags(sw)

    sa = sub.add_parser("analyze", help="aggregate results and write the report")
    sa.add_argument("--results", required=True)
    sa.add_argument("--summary", required=True)
    sa.add_argument("--report")
    sa.add_argument("--flux-def", choices=FLUX_DEFINITIONS, default="gaps")
    sa.add_argument("--experiments")
    return p


def _cmd_params(args) -> int:
    for line in builtin_parameter_set(args.set_id).as_lines():
        print(line)
    return EXIT_OK


def _cmd_run(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    try:
        scenario = build_bottleneck_scenario(args.width, _geometry(args), n=args.n)
    except (ConfigurationError, ContractViolation) as exc:
        raise UsageError(str(exc)) from None
    params = builtin_parameter_set(args.set_id)
    traj_fh = open(args.traj, "w", newline="", encoding="utf-8") if args.traj else None
    try:
        hook = harness.TrajectoryWriter(traj_fh) if traj_fh else None
        result = run(scenario, params, args.n, args.seed, args.dt, args.t_max, args.set_id, trajectory=hook)
    finally:
        if traj_fh:
            traj_fh.close()
    passed = len(result.passage_times)
    print(f"set={args.set_id} width={harness.fmt(args.width)} seed={args.seed} n={args.n}")
    print(f"completed={harness.fmt(result.completed)} passed={passed} steps={result.steps}")
    if result.completed and args.n >= 2:
        rec = flow_record(result, 0)
        print(f"total_time_s={harness.fmt(rec.total_time)} flux_per_s={harness.fmt(rec.flux)} "
              f"specific_flux_per_m_s={harness.fmt(rec.specific_flux)}")
    elif result.completed:
        print(f"total_time_s={harness.fmt(max(result.passage_times))} (flux undefined for one pedestrian)")
    if args.out:
        if args.n < 2:
            raise UsageError("--out needs --n >= 2 (flux is undefined for one pedestrian)")
        harness.write_results(args.out, [flow_record(result, 0)])
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        cfg = harness.SweepConfig(
            sets=args.sets,
            widths=args.widths,
            replications=args.reps,
            base_seed=args.base_seed,
            n=args.n,
            dt=args.dt,
            t_max=args.t_max,
            geometry=_geometry(args),
            output=args.out,
        )
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")

    def progress(k, total, r):
        if not args.quiet:
            state = "done" if r.completed else "INCOMPLETE"
            print(f"[{k}/{total}] {r.parameter_set} width={harness.fmt(r.width)} seed={r.seed} {state}",
                  file=sys.stderr)

    records = harness.run_matrix(cfg, jobs=args.jobs, progress=progress)
    harness.write_results(args.out, records)
    jammed = sum(not r.completed for r in records)
    print(f"wrote {len(records)} rows to {args.out} ({jammed} incomplete)")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    records = harness.read_results(args.results)
    records = harness.recompute_flux(records, args.flux_def)
    rows = aggregate(records)
    jammed = sum(not r.completed for r in records)
    if jammed:
        print(f"warning: {jammed} incomplete runs excluded from aggregation", file=sys.stderr)
    harness.write_summary(args.summary, rows)
    comparison = None
    if args.experiments:
        exps = harness.read_experiments(args.experiments)
        if not exps:
            print(f"warning: {args.experiments} has no experimental rows", file=sys.stderr)
        comparison = harness.compare_with_experiments(rows, exps) if exps else []
    report = harness.render_report(records, rows, comparison, args.flux_def)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)
    return EXIT_OK


_COMMANDS = {"params": _cmd_params, "run": _cmd_run, "sweep": _cmd_sweep, "analyze": _cmd_analyze}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pedsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InputError, OSError) as exc:
        print(f"pedsim: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationDivergedError, DegenerateGeometryError, DensityInfeasibleError) as exc:
        print(f"pedsim: simulation error: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())

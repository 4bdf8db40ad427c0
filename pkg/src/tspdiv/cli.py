"""Command-line entry point: ``tspdiv {run,solve,compare,trace}``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .algorithms import Algorithm, AlgorithmConfig, ConfigError, Generations, WallClock, run
from .harness import (
    ExperimentSpec,
    emit_summary,
    emit_trace_csv,
    records_to_csv,
    render_summary,
    run_experiment,
)
from .tsplib_io import TSPLIBError, load_instance

_FORMATS = ("csv", "json", "md")


def _progress(quiet: bool):
    if quiet:
        return None

    def report(rec):
        print(f"  {rec.instance} {rec.algorithm} rep {rec.replicate}: {rec.cost}", file=sys.stderr, flush=True)
    return report


def cmd_run(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    rows = run_experiment(spec, on_run=_progress(args.quiet))
    if args.out:
        emit_summary(rows, args.format, args.out)
    else:
        sys.stdout.write(render_summary(rows, args.format))
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    cfg = AlgorithmConfig(Algorithm.parse(args.algorithm), seed=args.seed)
    if args.generations is not None:
        stop = Generations(args.generations)
    else:
        stop = WallClock(args.seconds if args.seconds is not None else 0.1 * inst.m)
    res = run(inst, cfg, stop, track_diversity=args.trace is not None)
    line = f"{inst.name} {cfg.algorithm.value} best={res.cost}"
    if inst.optimum:
        line += f" optimum={inst.optimum} gap={100.0 * (res.cost - inst.optimum) / inst.optimum:.3f}%"
    line += f" iterations={res.iterations} elapsed={res.elapsed:.2f}s"
    print(line)
    if args.tour:
        print(" ".join(str(int(c) + 1) for c in res.best.order))
    if args.trace:
        emit_trace_csv(res.trace, args.trace, args.window)
    return 0


def cmd_compare(args) -> int:
    spec = ExperimentSpec.load(args.spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records: list = []
    rows = run_experiment(spec, records, on_run=_progress(args.quiet))
    path = emit_summary(rows, args.format, out / f"summary.{args.format}")
    records_to_csv(records, out / "runs.csv")
    print(path)
    return 0


def cmd_trace(args) -> int:
    inst = load_instance(args.instance)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    names = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    if not names:
        raise ConfigError("no algorithms given")
    configs = [AlgorithmConfig(Algorithm.parse(a), seed=args.seed) for a in names]
    for cfg in configs:
        res = run(inst, cfg, WallClock(args.seconds), track_diversity=True)
        path = emit_trace_csv(res.trace, out / f"{inst.name}_{cfg.algorithm.value}.csv", args.window)
        print(f"{path} best={res.cost}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tspdiv", description="Diversity-controlled genetic and memetic TSP solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment file and print the summary")
    r.add_argument("--spec", required=True, help="experiment YAML file")
    r.add_argument("--format", choices=_FORMATS, default="md")
    r.add_argument("--out", help="write the summary here instead of stdout")
    r.add_argument("--quiet", action="store_true", help="no per-run progress on stderr")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("solve", help="single run on one instance")
    s.add_argument("--instance", required=True, help="TSPLIB file or bundled instance name")
    s.add_argument("--algorithm", required=True, choices=[a.value for a in Algorithm], metavar="NAME")
    s.add_argument("--seed", type=int, default=0)
    budget = s.add_mutually_exclusive_group()
    budget.add_argument("--seconds", type=float, help="wall-clock budget (default 0.1 s per city)")
    budget.add_argument("--generations", type=int)
    s.add_argument("--trace", help="write a trace CSV here")
    s.add_argument("--window", type=float, default=0.01, help="trace window in seconds")
    s.add_argument("--tour", action="store_true", help="also print the tour (1-based)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="run an experiment file and write summary tables")
    c.add_argument("--spec", required=True)
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--format", choices=_FORMATS, default="md")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("trace", help="diversity/convergence CSV per algorithm")
    t.add_argument("--instance", required=True)
    t.add_argument("--algorithms", required=True, help="comma-separated names")
    t.add_argument("--seconds", type=float, required=True)
    t.add_argument("--out", required=True, help="output directory")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--window", type=float, default=0.01)
    t.set_defaults(func=cmd_trace)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TSPLIBError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

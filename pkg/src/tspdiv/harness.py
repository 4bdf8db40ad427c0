"""Replicated experiments, summary statistics and output files.

Experiment file format (YAML)::

    instances: [eil51, berlin52, data/my.tsp]   # bundled names or paths
    algorithms:
      - GADEGD                                  # bare name, defaults
      - {algorithm: GA, n: 64, p_m: 0.1}
      - {algorithm: GADEGD, characteristic: f, label: GADEGD-f}
    budget: {per_city: 0.1}        # or {seconds: 5.0} or {generations: 200}
    replicates: 30
    base_seed: 0
    trace_window: 0.01             # seconds per trace sample
    trace_dir: traces              # optional, one CSV per run

Seeds: replicate ``r`` of algorithm ``a`` on instance ``i`` runs with the
first 64-bit word of ``numpy.random.SeedSequence(base_seed,
spawn_key=(i, a, r)).generate_state(1, numpy.uint64)``.  That mixing is
stable across numpy releases, so a file fully determines its seeds.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterator, Sequence, Union

import numpy as np
import yaml

from .algorithms import (
    AlgorithmConfig,
    ConfigError,
    Generations,
    RunResult,
    RunTrace,
    StoppingCriterion,
    WallClock,
    run,
)
from .tsplib_io import Instance, TSPLIBError, load_instance

__all__ = [
    "PerCityRate",
    "Fixed",
    "GenerationBudget",
    "ExperimentSpec",
    "RunRecord",
    "SummaryRow",
    "SUMMARY_COLUMNS",
    "derive_seed",
    "run_cells",
    "summarize",
    "run_experiment",
    "time_to_optimum",
    "emit_trace_csv",
    "emit_summary",
    "render_summary",
    "load_summary_json",
    "records_to_csv",
]


@dataclass(frozen=True)
class PerCityRate:
    seconds_per_city: float = 0.1

    def stop(self, instance: Instance) -> StoppingCriterion:
        return WallClock(self.seconds_per_city * instance.m)


@dataclass(frozen=True)
class Fixed:
    seconds: float

    def stop(self, instance: Instance) -> StoppingCriterion:
        return WallClock(self.seconds)


@dataclass(frozen=True)
class GenerationBudget:
    count: int

    def stop(self, instance: Instance) -> StoppingCriterion:
        return Generations(self.count)


BudgetRule = Union[PerCityRate, Fixed, GenerationBudget]


def _parse_budget(raw) -> BudgetRule:
    if raw is None:
        return PerCityRate()
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigError("budget must be one of {per_city: s}, {seconds: s}, {generations: g}")
    (kind, value), = raw.items()
    try:
        if kind == "per_city":
            if not float(value) > 0:
                raise ConfigError("per_city rate must be positive")
            return PerCityRate(float(value))
        if kind == "seconds":
            if not float(value) > 0:
                raise ConfigError("seconds must be positive")
            return Fixed(float(value))
        if kind == "generations":
            if int(value) != value or value < 1:
                raise ConfigError("generations must be a positive integer")
            return GenerationBudget(int(value))
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"bad budget value {value!r}") from None
    raise ConfigError(f"unknown budget kind {kind!r}")


@dataclass(frozen=True)
class ExperimentSpec:
    instances: tuple[str, ...]
    algorithms: tuple[AlgorithmConfig, ...]
    budget: BudgetRule = PerCityRate()
    replicates: int = 30
    base_seed: int = 0
    trace_window: float = 0.01
    labels: tuple[str, ...] = ()
    trace_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(str(i) for i in self.instances))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.instances:
            raise ConfigError("experiment needs at least one instance")
        if not self.algorithms:
            raise ConfigError("experiment needs at least one algorithm")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError("replicates must be a positive integer")
        if not self.trace_window > 0:
            raise ConfigError("trace_window must be positive")
        if not 0 <= int(self.base_seed) < 2**64:
            raise ConfigError("base_seed must be a 64-bit unsigned integer")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(c.label for c in self.algorithms))
        if len(self.labels) != len(self.algorithms):
            raise ConfigError("one label per algorithm")
        if len(set(self.labels)) != len(self.labels):
            raise ConfigError(f"algorithm labels must be unique, got {list(self.labels)}")

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "ExperimentSpec":
        if not isinstance(d, dict):
            raise ConfigError("experiment file must hold a mapping")
        known = {"instances", "algorithms", "budget", "replicates", "base_seed", "trace_window", "trace_dir"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown experiment keys: {sorted(unknown)}")
        configs, labels = [], []
        for entry in d.get("algorithms") or []:
            if isinstance(entry, str):
                entry = {"algorithm": entry}
            if not isinstance(entry, dict):
                raise ConfigError(f"bad algorithm entry {entry!r}")
            entry = dict(entry)
            label = entry.pop("label", None)
            cfg = AlgorithmConfig.from_dict(entry)
            configs.append(cfg)
            labels.append(str(label) if label is not None else cfg.label)
        instances = list(d.get("instances") or [])
        if base_dir is not None:
            instances = [_resolve(i, base_dir) for i in instances]
        trace_dir = d.get("trace_dir")
        if trace_dir is not None and base_dir is not None:
            trace_dir = str(base_dir / trace_dir)
        return cls(
            instances=instances,
            algorithms=configs,
            budget=_parse_budget(d.get("budget")),
            replicates=d.get("replicates", 30),
            base_seed=d.get("base_seed", 0),
            trace_window=float(d.get("trace_window", 0.01)),
            labels=tuple(labels),
            trace_dir=trace_dir,
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentSpec":
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text())
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}") from None
        return cls.from_dict(data, base_dir=path.parent)


def _resolve(entry: str, base_dir: Path) -> str:
    p = Path(entry)
    if not p.is_absolute() and (base_dir / p).exists():
        return str(base_dir / p)
    return str(entry)


def derive_seed(base_seed: int, instance_index: int, algorithm_index: int, replicate: int) -> int:
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(instance_index, algorithm_index, replicate))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class RunRecord:
    """Per-run numbers the summary is aggregated from."""

    instance: str
    algorithm: str
    replicate: int
    seed: int
    cost: int
    generated: int
    gd: int
    ls_calls: int
    ls_applied: int
    iterations: int
    elapsed: float
    time_to_best: float

    @classmethod
    def of(cls, instance: str, algorithm: str, replicate: int, r: RunResult) -> "RunRecord":
        return cls(instance, algorithm, replicate, r.seed, r.cost, r.generated_solutions, r.gd_solutions,
                   r.ls_calls, r.ls_applied_iterations, r.iterations, r.elapsed, r.time_to_best)


SUMMARY_COLUMNS = (
    "instance", "optimum", "algorithm", "mean", "stddev", "best", "gap_pct", "generated",
    "gd_pct", "ls_calls", "ls_applied_pct", "opt_hits", "mean_time_to_opt",
)


@dataclass(frozen=True)
class SummaryRow:
    instance: str
    optimum: int | None
    algorithm: str
    mean: float
    stddev: float
    best: int | None
    gap_pct: float | None
    generated: float
    gd_pct: float
    ls_calls: float
    ls_applied_pct: float
    opt_hits: int
    mean_time_to_opt: float | None
    error: str | None = field(default=None, compare=True)

    def as_dict(self) -> dict:
        d = {c: getattr(self, c) for c in SUMMARY_COLUMNS}
        if self.error is not None:
            d["error"] = self.error
        return d


@dataclass
class _Cell:
    instance: str
    optimum: int | None
    algorithm: str
    records: list[RunRecord] = field(default_factory=list)
    error: str | None = None


def run_cells(spec: ExperimentSpec, on_run=None) -> Iterator[_Cell]:
    """Execute every (instance, algorithm) cell; yields cells as they finish.

    A cell whose instance cannot be read carries ``error`` instead of runs.
    """
    for ii, entry in enumerate(spec.instances):
        try:
            inst = load_instance(entry)
        except (OSError, TSPLIBError) as e:
            for label in spec.labels:
                yield _Cell(Path(entry).stem, None, label, error=f"{type(e).__name__}: {e}")
            continue
        stop = spec.budget.stop(inst)
        for ai, (cfg, label) in enumerate(zip(spec.algorithms, spec.labels)):
            cell = _Cell(inst.name, inst.optimum, label)
            for r in range(spec.replicates):
                seed = derive_seed(spec.base_seed, ii, ai, r)
                res = run(inst, cfg.with_seed(seed), stop, track_diversity=spec.trace_dir is not None)
                cell.records.append(RunRecord.of(inst.name, label, r, res))
                if spec.trace_dir is not None:
                    try:
                        out = Path(spec.trace_dir) / f"{inst.name}_{label}_r{r}.csv"
                        out.parent.mkdir(parents=True, exist_ok=True)
                        emit_trace_csv(res.trace, out, spec.trace_window)
                    except OSError as e:
                        cell.error = f"{type(e).__name__}: {e}"
                        break
                if on_run is not None:
                    on_run(cell.records[-1])
            yield cell


def summarize(instance: str, optimum: int | None, algorithm: str, records: Sequence[RunRecord],
              error: str | None = None) -> SummaryRow:
    if not records:
        nan = math.nan
        return SummaryRow(instance, optimum, algorithm, nan, nan, None, None, nan, nan, nan, nan, 0, None,
                          error or "no runs")
    costs = np.array([r.cost for r in records], dtype=float)
    mean = float(costs.mean())
    generated = np.array([r.generated for r in records], dtype=float)
    gd = np.array([r.gd for r in records], dtype=float)
    iters = np.array([r.iterations for r in records], dtype=float)
    applied = np.array([r.ls_applied for r in records], dtype=float)
    gd_pct = 100.0 * gd / np.maximum(generated, 1)
    applied_pct = 100.0 * applied / np.maximum(iters, 1)
    hits = [r for r in records if optimum is not None and r.cost <= optimum]
    return SummaryRow(
        instance=instance,
        optimum=optimum,
        algorithm=algorithm,
        mean=mean,
        stddev=float(costs.std(ddof=0)),
        best=int(costs.min()),
        gap_pct=100.0 * (mean - optimum) / optimum if optimum else None,
        generated=float(generated.mean()),
        gd_pct=float(gd_pct.mean()),
        ls_calls=float(np.mean([r.ls_calls for r in records])),
        ls_applied_pct=float(applied_pct.mean()),
        opt_hits=len(hits),
        mean_time_to_opt=float(np.mean([r.time_to_best for r in hits])) if hits else None,
        error=error,
    )


def run_experiment(spec: ExperimentSpec, records: list | None = None, on_run=None) -> list[SummaryRow]:
    """All cells of ``spec``, one summary row each.

    Pass a list as ``records`` to also collect the per-run records.
    """
    rows = []
    for cell in run_cells(spec, on_run):
        if records is not None:
            records.extend(cell.records)
        rows.append(summarize(cell.instance, cell.optimum, cell.algorithm, cell.records, cell.error))
    return rows


def time_to_optimum(instance: Instance, config: AlgorithmConfig, cap_seconds: float,
                    replicates: int) -> tuple[int, float | None]:
    """How many replicates reach the known optimum within ``cap_seconds``,
    and their mean time to get there (``None`` when there are no hits)."""
    if instance.optimum is None:
        raise ValueError(f"instance {instance.name} has no known optimum")
    if replicates < 1:
        raise ValueError("replicates must be positive")
    if cap_seconds <= 0:
        return 0, None
    times = []
    for r in range(replicates):
        seed = int(np.random.SeedSequence(int(config.seed), spawn_key=(r,)).generate_state(1, np.uint64)[0])
        res = run(instance, config.with_seed(seed), WallClock(cap_seconds), target=instance.optimum)
        if res.cost <= instance.optimum and res.time_to_best <= cap_seconds:
            times.append(res.time_to_best)
    return len(times), (float(np.mean(times)) if times else None)


def _g6(x) -> str:
    return f"{x:.6g}"


def emit_trace_csv(trace: RunTrace, path: str | Path, window: float = 0.01) -> Path:
    """One row per time window: ``elapsed_s,best_cost,diversity``.

    When diversity was estimated from sampled pairs a ``#`` comment line
    precedes the header.
    """
    if len(trace) == 0:
        raise ValueError("trace is empty")
    path = Path(path)
    rows = trace.windowed(window)
    with path.open("w", newline="") as fh:
        if trace.subsampled:
            fh.write("# diversity estimated from sampled pairs\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["elapsed_s", "best_cost", "diversity"])
        for elapsed, best, div in rows:
            w.writerow([_g6(elapsed), best, _g6(div)])
    return path


def _cell_text(v, col: str) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if col in ("mean", "stddev", "generated", "ls_calls"):
            return f"{v:.2f}" if col != "generated" else f"{v:.0f}"
        return f"{v:.4g}" if col == "mean_time_to_opt" else f"{v:.2f}"
    return str(v)


def _best_means(rows: Sequence[SummaryRow]) -> dict[str, float]:
    best: dict[str, float] = {}
    for r in rows:
        if r.error is None and not math.isnan(r.mean):
            best[r.instance] = min(best.get(r.instance, math.inf), r.mean)
    return best


def _markdown(rows: Sequence[SummaryRow]) -> str:
    cols = list(SUMMARY_COLUMNS) + (["error"] if any(r.error for r in rows) else [])
    lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
    best = _best_means(rows)
    wins: dict[str, int] = {}
    for r in rows:
        wins.setdefault(r.algorithm, 0)
    for r in rows:
        d = r.as_dict()
        cells = [_cell_text(d.get(c), c) for c in cols]
        if r.instance in best and r.error is None and r.mean == best[r.instance]:
            cells[cols.index("mean")] = f"**{cells[cols.index('mean')]}**"
            wins[r.algorithm] += 1
        lines.append("| " + " | ".join(cells) + " |")
    footer = ["" for _ in cols]
    footer[0] = "**wins**"
    footer[cols.index("algorithm")] = ", ".join(f"{a}: {k}" for a, k in wins.items())
    lines.append("| " + " | ".join(footer) + " |")
    return "\n".join(lines) + "\n"


def render_summary(rows: Sequence[SummaryRow], fmt: str) -> str:
    """``rows`` as ``csv``, ``json`` or ``md`` (markdown table) text."""
    if not rows:
        raise ValueError("no rows to write")
    fmt = {"markdown": "md", "markdown-table": "md"}.get(fmt, fmt)
    if fmt == "csv":
        cols = list(SUMMARY_COLUMNS) + (["error"] if any(r.error for r in rows) else [])
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in r.as_dict().items()})
        return buf.getvalue()
    if fmt == "json":
        return json.dumps([r.as_dict() for r in rows], indent=2) + "\n"
    if fmt == "md":
        return _markdown(rows)
    raise ValueError(f"unknown summary format {fmt!r} (csv, json, md)")


def emit_summary(rows: Sequence[SummaryRow], fmt: str, path: str | Path) -> Path:
    text = render_summary(rows, fmt)
    path = Path(path)
    path.write_text(text)
    return path


def load_summary_json(path: str | Path) -> list[SummaryRow]:
    names = {f.name for f in fields(SummaryRow)}
    return [SummaryRow(**{k: v for k, v in d.items() if k in names}) for d in json.loads(Path(path).read_text())]


def records_to_csv(records: Sequence[RunRecord], path: str | Path) -> Path:
    path = Path(path)
    cols = [f.name for f in fields(RunRecord)]
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(asdict(r))
    return path

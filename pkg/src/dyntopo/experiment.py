"""Experiment plans, derived seeds and the CSV files that tie the pipeline together."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from . import analysis
from .benchmarks import FUNCTION_NAMES, make_function
from .landscape import MetricSet, metric_set
from .simnet import DYNAMIC, RunConfig, RunRecord, run
from .topology import STATIC_KINDS

SCHEMA_LINE = "# schema=1"
RESULT_COLUMNS = (
    "function", "dim", "topology", "alpha", "topo_seed", "start_seed",
    "error_raw", "converged", "ticks", "messages", "local_searches",
)
METRIC_COLUMNS = (
    "function", "dimension", "DM", "FEM_macro", "FEM_micro", "SEM_macro",
    "SEM_micro", "PIC_macro", "PIC_micro", "separable", "comment",
)
WORKERS_ENV = "DYNTOPO_WORKERS"


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any JSON-serializable key."""
    digest = hashlib.sha256(json.dumps(parts, separators=(",", ":")).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class PlannedRun:
    function: str
    dim: int
    topology: str
    alpha: Optional[float]
    topo_seed: int
    start_seed: int

    @property
    def key(self) -> tuple:
        return (self.function, self.dim, self.topology, _fmt_alpha(self.alpha), self.topo_seed, self.start_seed)


@dataclass
class ExperimentPlan:
    functions: list[tuple[str, int]]
    topologies: list[str] = field(default_factory=list)
    dynamic_alphas: list[float] = field(default_factory=list)
    topology_seeds: list[int] = field(default_factory=lambda: list(range(5)))
    start_seeds: list[int] = field(default_factory=lambda: list(range(10)))
    budget: int = 100
    max_ticks: Optional[int] = None
    master_seed: int = 0
    output: str = "results"

    def __post_init__(self):
        for name, dim in self.functions:
            make_function(name, int(dim))
        for kind in self.topologies:
            if kind not in STATIC_KINDS:
                raise ValueError(f"unknown topology kind {kind!r}")
        for a in self.dynamic_alphas:
            if not 0.0 < a <= 1.0:
                raise ValueError(f"alpha {a} outside (0, 1]")
        if not self.topology_seeds or not self.start_seeds:
            raise ValueError("plan needs at least one topology seed and one start seed")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown plan fields: {sorted(unknown)}")
        data = dict(data)
        data["functions"] = [(str(n), int(d)) for n, d in data["functions"]]
        data["dynamic_alphas"] = [float(a) for a in data.get("dynamic_alphas", [])]
        return cls(**data)

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def runs(self) -> Iterator[PlannedRun]:
        variants = [(k, None) for k in self.topologies] + [(DYNAMIC, a) for a in self.dynamic_alphas]
        for name, dim in self.functions:
            for kind, alpha in variants:
                for ts in self.topology_seeds:
                    for ss in self.start_seeds:
                        yield PlannedRun(name, dim, kind, alpha, ts, ss)

    def config_for(self, pr: PlannedRun) -> RunConfig:
        # start seeds are shared across topologies so comparisons are paired
        label = pr.topology if pr.alpha is None else f"{DYNAMIC}_{_fmt_alpha(pr.alpha)}"
        return RunConfig(
            function=pr.function,
            dimension=pr.dim,
            topology=pr.topology,
            alpha=pr.alpha,
            topology_seed=derive_seed(self.master_seed, "topology", pr.dim, label, pr.topo_seed),
            start_seed=derive_seed(self.master_seed, "start", pr.function, pr.dim, pr.start_seed),
            budget=self.budget,
            max_ticks=self.max_ticks,
        )


def _fmt_alpha(alpha: Optional[float]) -> str:
    return "" if alpha is None else f"{alpha:g}"


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _write_header(fh, columns) -> None:
    fh.write(SCHEMA_LINE + "\n")
    csv.writer(fh, lineterminator="\n").writerow(columns)


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))


def result_row(pr: PlannedRun, rec) -> list[str]:
    return [
        pr.function, str(pr.dim), pr.topology, _fmt_alpha(pr.alpha), str(pr.topo_seed), str(pr.start_seed),
        _fmt_float(rec.error_raw), "1" if rec.converged else "0", str(rec.convergence_ticks),
        str(rec.messages), str(rec.local_searches),
    ]


def _row_key(row: dict) -> tuple:
    return (row["function"], int(row["dim"]), row["topology"], row["alpha"], int(row["topo_seed"]), int(row["start_seed"]))


def _execute(job: tuple[RunConfig, Optional[str]], on_event=None):
    cfg, trace_path = job
    if trace_path is None:
        return run(cfg, on_event=on_event)
    with open(trace_path, "w") as fh:
        return run(cfg, trace=fh, on_event=on_event)


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer")


def run_plan(plan: ExperimentPlan, out_dir=None, trace: bool = False, workers: Optional[int] = None,
             observe: Optional[Callable[[PlannedRun], Callable]] = None,
             on_record: Optional[Callable[[PlannedRun, RunRecord], None]] = None) -> Path:
    """Execute every planned run not already present in ``results.csv``.

    Rows are appended in plan order by this process only, so the file is
    identical whatever the worker count. ``observe(run)`` may return an event
    callback for that run; it forces in-process execution. ``on_record`` sees
    every finished run.
    """
    out = Path(out_dir if out_dir is not None else plan.output)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "results.csv"
    done: set[tuple] = set()
    if path.exists():
        done = {_row_key(r) for r in read_csv(path)}
    else:
        with open(path, "w", newline="") as fh:
            _write_header(fh, RESULT_COLUMNS)
    pending = [pr for pr in plan.runs() if pr.key not in done]
    trace_dir = out / "traces" if trace else None
    if trace_dir is not None:
        trace_dir.mkdir(exist_ok=True)

    def job(pr: PlannedRun):
        tp = None
        if trace_dir is not None:
            tp = str(trace_dir / ("_".join(str(p) for p in pr.key if p != "") + ".jsonl"))
        return plan.config_for(pr), tp

    workers = worker_count() if workers is None else workers
    jobs = (job(pr) for pr in pending)
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if workers > 1 and observe is None:
            with ProcessPoolExecutor(workers) as pool:
                for pr, rec in zip(pending, pool.map(_execute, jobs, chunksize=4)):
                    writer.writerow(result_row(pr, rec))
                    if on_record is not None:
                        on_record(pr, rec)
        else:
            for pr, j in zip(pending, jobs):
                rec = _execute(j, None if observe is None else observe(pr))
                writer.writerow(result_row(pr, rec))
                if on_record is not None:
                    on_record(pr, rec)
                fh.flush()
    return path


def load_results(path) -> list[dict]:
    """Results rows with the topology column turned into a label (``dynamic_0.1``)."""
    rows = read_csv(path)
    missing = set(RESULT_COLUMNS) - set(rows[0]) if rows else set()
    if missing:
        raise ValueError(f"results file lacks columns {sorted(missing)}")
    out = []
    for r in rows:
        r = dict(r)
        r["dim"] = int(r["dim"])
        if r["topology"] == DYNAMIC:
            r["topology"] = f"{DYNAMIC}_{r['alpha']}"
        out.append(r)
    return out


# --- landscape metrics ------------------------------------------------------

def landscape_rows(functions: Iterable[str], dims: Iterable[int], runs: int = 30,
                   master_seed: int = 0, pic_mode: str = "zero") -> list[tuple[str, MetricSet]]:
    out = []
    for dim in dims:
        for name in functions:
            f = make_function(name, int(dim))
            rng = np.random.default_rng(derive_seed(master_seed, "landscape", name, int(dim)))
            out.append((name, metric_set(f, runs, rng, pic_mode=pic_mode)))
    return out


def write_metrics(path, rows: list[tuple[str, MetricSet]], runs: int) -> None:
    comment = "low_confidence" if runs < 2 else ""
    with open(path, "w", newline="") as fh:
        _write_header(fh, METRIC_COLUMNS)
        w = csv.writer(fh, lineterminator="\n")
        for name, m in rows:
            w.writerow([
                name, m.dimension, _fmt_float(m.dm), _fmt_float(m.fem_macro), _fmt_float(m.fem_micro),
                _fmt_float(m.sem_macro), _fmt_float(m.sem_micro), _fmt_float(m.pic_macro),
                _fmt_float(m.pic_micro), int(m.separable), comment,
            ])


def load_metrics(path) -> dict[tuple[str, int], MetricSet]:
    out = {}
    for r in read_csv(path):
        key = (r["function"], int(r["dimension"]))
        out[key] = MetricSet(
            fem_micro=float(r["FEM_micro"]), fem_macro=float(r["FEM_macro"]),
            sem_micro=float(r["SEM_micro"]), sem_macro=float(r["SEM_macro"]),
            pic_micro=float(r["PIC_micro"]), pic_macro=float(r["PIC_macro"]),
            dm=float(r["DM"]), dimension=int(r["dimension"]), separable=bool(int(r["separable"])),
        )
    return out


# --- analysis outputs -------------------------------------------------------

def analyze(results_path, metrics_path, out_dir) -> dict[tuple[str, str], analysis.DecisionTree]:
    """Summaries, best labels, one tree per (dimension, statistic), and plot data."""
    records = load_results(results_path)
    metrics = load_metrics(metrics_path)
    result_keys = {(r["function"], r["dim"]) for r in records}
    for key in sorted(metrics):
        if key not in result_keys:
            raise KeyError(f"results contain no runs for {key[0]} at dimension {key[1]}")
    for key in sorted(result_keys):
        if key not in metrics:
            raise KeyError(f"metrics contain no row for {key[0]} at dimension {key[1]}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = analysis.summarize(records)

    with open(out / "summaries.csv", "w", newline="") as fh:
        cols = ["function", "dim", "topology", "runs"]
        for d in analysis.DIMENSIONS:
            cols += [f"{d}_mean", f"{d}_std", f"{d}_mps"]
        _write_header(fh, cols)
        w = csv.writer(fh, lineterminator="\n")
        for s in summaries:
            row = [s.function, s.dim, s.topology, s.runs]
            for d in analysis.DIMENSIONS:
                st = s.stats[d]
                row += [_fmt_float(st.mean), _fmt_float(st.std), _fmt_float(st.mps)]
            w.writerow(row)

    trees = {}
    label_rows = []
    report = []
    for d in analysis.DIMENSIONS:
        for stat in analysis.STATISTICS:
            labels = analysis.best_labels(summaries, d, stat)
            keys = sorted(labels)
            X = [metrics[k].features() for k in keys]
            y = [labels[k] for k in keys]
            tree = analysis.train_cart(X, y)
            trees[(d, stat)] = tree
            (out / f"tree_{d}_{stat}.json").write_text(tree.to_json() + "\n")
            (out / f"tree_{d}_{stat}.txt").write_text(tree.render())
            label_rows += [[k[0], k[1], d, stat, labels[k]] for k in keys]
            report.append([d, stat, len(keys), _fmt_float(analysis.training_error(tree, X, y)),
                           int(analysis.is_consistent(X, y)), tree.depth()])

    with open(out / "labels.csv", "w", newline="") as fh:
        _write_header(fh, ["function", "dim", "dimension", "statistic", "label"])
        csv.writer(fh, lineterminator="\n").writerows(label_rows)

    with open(out / "trees.csv", "w", newline="") as fh:
        _write_header(fh, ["dimension", "statistic", "rows", "train_error", "consistent", "depth"])
        csv.writer(fh, lineterminator="\n").writerows(report)

    normalized = analysis.normalize_records(records)
    cells: dict[tuple, list[dict]] = {}
    for r in normalized:
        cells.setdefault((r["function"], r["dim"], r["topology"]), []).append(r)
    with open(out / "plotdata.csv", "w", newline="") as fh:
        cols = ["function", "dim", "topology", "dimension", *analysis.QUANTILE_NAMES, "mean", "std"]
        _write_header(fh, cols)
        w = csv.writer(fh, lineterminator="\n")
        for (fn, dim, label), rows in sorted(cells.items()):
            for d in analysis.DIMENSIONS:
                st = analysis.summary_stats([r[d] for r in rows])
                w.writerow([fn, dim, label, d] + [_fmt_float(st[c]) for c in (*analysis.QUANTILE_NAMES, "mean", "std")])

    dist = analysis.metric_distribution([metrics[k] for k in sorted(metrics)])
    with open(out / "metric_distribution.csv", "w", newline="") as fh:
        _write_header(fh, ["metric", *analysis.QUANTILE_NAMES])
        w = csv.writer(fh, lineterminator="\n")
        for metric, st in dist.items():
            w.writerow([metric] + [_fmt_float(st[c]) for c in analysis.QUANTILE_NAMES])
    return trees


def desk_plan() -> ExperimentPlan:
    return ExperimentPlan(
        functions=[(n, d) for d in (10, 20) for n in FUNCTION_NAMES],
        topologies=["complete", "ring", "small_world", "grid"],
        dynamic_alphas=[0.1, 1.0],
        topology_seeds=[0, 1, 2],
        start_seeds=[0, 1, 2, 3, 4],
        output="results/desk",
    )


def full_plan() -> ExperimentPlan:
    return ExperimentPlan(
        functions=[(n, d) for d in (50, 100) for n in FUNCTION_NAMES],
        topologies=list(STATIC_KINDS),
        dynamic_alphas=[0.1, 0.3, 0.7, 1.0],
        topology_seeds=list(range(5)),
        start_seeds=list(range(10)),
        output="results/full",
    )


def plan_to_dict(plan: ExperimentPlan) -> dict:
    d = dict(plan.__dict__)
    d["functions"] = [[n, dim] for n, dim in plan.functions]
    return d

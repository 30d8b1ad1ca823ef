"""Experiment orchestration: config, grid execution, persistence.

A run is a pure function of (config, code version).  Every command
echoes its resolved config into the output directory, appends rows to a
resumable results CSV in a fixed column order, and writes the
long-format data CSV behind each figure before rendering it.
"""

from __future__ import annotations

import csv
import json
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import figures
from .audit import random_audit
from .capacity import capacity
from .dataspace import Dataset, gen_synthetic, load_csv
from .diameter import diam_dictionary_closed_form, optimal_dictionary_audit
from .hypotheses import HypothesisClass, Labeling, ModelFamily, default_grid
from .metrics import cost_of_exhaustion, manipulability, select_h_opt

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultsSink",
    "load_config",
    "build_dataset",
    "run_fig2",
    "run_capacity",
    "run_manipulability",
    "run_scatter",
    "run_budget_sweep",
    "run_coe",
]

RESULT_COLUMNS = ("experiment_id", "family", "class_id", "hyperparams_json",
                  "metric", "value", "stderr", "reps", "seed", "wallclock_ms")


class ConfigError(ValueError):
    """Invalid or unknown configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run depends on besides the code itself."""

    outdir: str = "results"
    seed: int = 0
    dataset: dict = field(default_factory=lambda: {
        "kind": "synthetic", "n": 1000, "p_sensitive": 0.3, "seed": 0})
    families: tuple[str, ...] = ("linear", "perceptron", "tree", "gbdt")
    max_classes_per_family: Optional[int] = None
    budget_fraction: float = 0.1
    budget_fractions: tuple[float, ...] = (0.02, 0.05, 0.1, 0.2, 0.4)
    reps: int = 15
    capacity_draws: int = 200
    restarts: int = 3
    folds: int = 5
    workers: int = 1
    record_timing: bool = False
    memories: tuple[int, ...] = (0, 100, 250, 500, 750, 1000)
    budgets: tuple[int, ...] = (0, 100, 300, 500)
    fig2_reps: int = 100

    def class_seed(self, *tags) -> int:
        """Stable per-cell seed; independent of scheduling and of the
        process hash seed."""
        words = [zlib.crc32(repr(t).encode()) for t in tags]
        return int(np.random.default_rng([self.seed] + words).integers(0, 2 ** 63))


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build a config from an optional JSON file plus flag overrides."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    data.update(overrides or {})
    known = ExperimentConfig.__dataclass_fields__
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key, value in list(data.items()):
        if isinstance(value, list):
            data[key] = tuple(value)
    try:
        return ExperimentConfig(**data)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def build_dataset(cfg: ExperimentConfig) -> Dataset:
    spec = dict(cfg.dataset)
    kind = spec.pop("kind", "synthetic")
    if kind == "synthetic":
        return gen_synthetic(n=int(spec.get("n", 1000)),
                             p_sensitive=float(spec.get("p_sensitive", 0.3)),
                             label_model=spec.get("label_model"),
                             seed=int(spec.get("seed", cfg.seed)))
    if kind == "csv":
        return load_csv(spec["path"], spec["sensitive_column"],
                        spec.get("label_column"), spec.get("schema"))
    raise ConfigError(f"unknown dataset kind {kind!r}")


def _echo_config(cfg: ExperimentConfig) -> None:
    os.makedirs(cfg.outdir, exist_ok=True)
    with open(os.path.join(cfg.outdir, "config.resolved.json"), "w", encoding="utf-8") as f:
        json.dump(asdict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


class ResultsSink:
    """Append-only results CSV with crash-resume.

    A partially written file is a valid prefix; reopening skips rows
    whose (experiment, family, class, metric) key is already present.
    """

    def __init__(self, path: str, resume: bool = True):
        self.path = path
        self.done: set[tuple] = set()
        exists = os.path.exists(path) and os.path.getsize(path) > 0
        if exists and resume:
            with open(path, newline="", encoding="utf-8") as f:
                reader = csv.DictReader(f)
                if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
                    raise ConfigError(f"{path}: unexpected results schema")
                for row in reader:
                    self.done.add((row["experiment_id"], row["family"],
                                   row["class_id"], row["metric"]))
        self._f = open(path, "a", newline="", encoding="utf-8")
        self._writer = csv.writer(self._f)
        if not exists:
            self._writer.writerow(RESULT_COLUMNS)
            self._f.flush()

    def has(self, experiment_id: str, family: str, class_id: str, metric: str) -> bool:
        return (experiment_id, family, class_id, metric) in self.done

    def write(self, experiment_id: str, family: str, class_id: str,
              hyperparams: dict, metric: str, value: float, stderr: float = 0.0,
              reps: int = 1, seed: int = 0, wallclock_ms: int = 0) -> None:
        key = (experiment_id, family, class_id, metric)
        if key in self.done:
            return
        self._writer.writerow([
            experiment_id, family, class_id,
            json.dumps(hyperparams, sort_keys=True),
            metric, repr(float(value)), repr(float(stderr)),
            reps, seed, wallclock_ms,
        ])
        self._f.flush()
        self.done.add(key)

    def close(self) -> None:
        self._f.close()


def _run_cells(cells: Sequence, fn: Callable, workers: int) -> list:
    """Evaluate independent cells; output order never depends on scheduling."""
    if workers <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, cells))


def _write_plain_csv(path: str, columns: Sequence[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] if not isinstance(row[c], float)
                             else repr(row[c]) for c in columns])


def _timed(cfg: ExperimentConfig, fn: Callable, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    ms = int(1000 * (time.perf_counter() - t0)) if cfg.record_timing else 0
    return out, ms


def proportional_dictionary(dataset: Dataset, m: int) -> tuple[Labeling, tuple[int, int]]:
    """Stored-ones labeling with group shares matching the group sizes."""
    ones_a = min(int(round(m * dataset.nA / dataset.n)), dataset.nA)
    ones_n = min(m - ones_a, dataset.nNotA)
    h = np.zeros(dataset.n, dtype=np.int8)
    h[dataset.group_a[:ones_a]] = 1
    h[dataset.group_not_a[:ones_n]] = 1
    return h, (ones_a, ones_n)


def _families(cfg: ExperimentConfig) -> list[ModelFamily]:
    fams = []
    for kind in cfg.families:
        fam = default_grid(kind)
        if cfg.max_classes_per_family is not None:
            fam = ModelFamily(kind, fam.grid[:cfg.max_classes_per_family])
        fams.append(fam)
    return fams


# ----------------------------------------------------------- experiments


def run_fig2(cfg: ExperimentConfig) -> dict:
    """Random vs optimal dictionary audits across memory and budget."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))

    def cell(mb):
        m, b = mb
        d_star, ones = proportional_dictionary(dataset, m)
        opt, _ = optimal_dictionary_audit(m, b, dataset, ones)
        vals = np.empty(cfg.fig2_reps)
        for rep in range(cfg.fig2_reps):
            audit = random_audit(dataset, b / dataset.n, b / dataset.n,
                                 cfg.class_seed("fig2", b, rep))
            vals[rep] = diam_dictionary_closed_form(d_star, m, audit.queries, dataset)
        stderr = float(vals.std(ddof=1) / np.sqrt(cfg.fig2_reps)) if cfg.fig2_reps > 1 else 0.0
        return m, b, float(vals.mean()), stderr, float(opt)

    cells = [(m, b) for m in cfg.memories for b in cfg.budgets]
    rows = []
    for m, b, rnd, stderr, opt in _run_cells(cells, cell, cfg.workers):
        rows.append({"memory": m, "budget": b, "strategy": "random",
                     "diam": rnd, "stderr": stderr})
        rows.append({"memory": m, "budget": b, "strategy": "optimal",
                     "diam": opt, "stderr": 0.0})
        hp = {"memory": m, "budget": b}
        sink.write("fig2", "dictionary", f"dict_m{m}_b{b}", hp, "diam_random",
                   rnd, stderr, cfg.fig2_reps, cfg.seed)
        sink.write("fig2", "dictionary", f"dict_m{m}_b{b}", hp, "diam_optimal",
                   opt, 0.0, 1, cfg.seed)
    sink.close()
    data_path = os.path.join(cfg.outdir, "fig2_data.csv")
    svg_path = os.path.join(cfg.outdir, "fig2.svg")
    _write_plain_csv(data_path, ("memory", "budget", "strategy", "diam", "stderr"), rows)
    figures.fig2_chart(rows, svg_path)
    return {"data": data_path, "svg": svg_path, "rows": rows}


def _capacity_table(cfg: ExperimentConfig, dataset: Dataset) -> list[dict]:
    cells = [(fam.family_kind, cls) for fam in _families(cfg) for cls in fam.grid]

    def cell(fc):
        kind, cls = fc
        est, ms = _timed(cfg, capacity, cls, dataset, cfg.capacity_draws,
                         cfg.restarts, cfg.class_seed("capacity", cls.class_id()))
        return {"family": kind, "class_id": cls.class_id(), "cls": cls,
                "mean": est.mean, "stderr": est.stderr, "ms": ms}

    return _run_cells(cells, cell, cfg.workers)


def run_capacity(cfg: ExperimentConfig) -> dict:
    """Capacity estimate for every class of the configured families."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))
    table = _capacity_table(cfg, dataset)
    for row in table:
        sink.write("capacity", row["family"], row["class_id"], row["cls"].params,
                   "capacity", row["mean"], row["stderr"], cfg.capacity_draws,
                   cfg.seed, row["ms"])
    sink.close()
    data_path = os.path.join(cfg.outdir, "capacity_data.csv")
    svg_path = os.path.join(cfg.outdir, "capacity.svg")
    _write_plain_csv(data_path, ("class_id", "family", "mean", "stderr"), table)
    figures.capacity_hist(
        {fam: [r["mean"] for r in table if r["family"] == fam]
         for fam in {r["family"] for r in table}}, svg_path)
    return {"data": data_path, "svg": svg_path, "rows": table}


def _manipulability_table(cfg: ExperimentConfig, dataset: Dataset,
                          budget_fraction: float) -> list[dict]:
    cells = [(fam.family_kind, cls) for fam in _families(cfg) for cls in fam.grid]

    def cell(fc):
        kind, cls = fc
        est, ms = _timed(cfg, manipulability, cls, dataset, budget_fraction,
                         cfg.reps, cfg.seed)
        return {"family": kind, "class_id": cls.class_id(), "cls": cls,
                "mean": est.mean, "stderr": est.stderr, "ms": ms}

    return _run_cells(cells, cell, cfg.workers)


def run_manipulability(cfg: ExperimentConfig) -> dict:
    """Manipulability under random audits for every configured class."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))
    table = _manipulability_table(cfg, dataset, cfg.budget_fraction)
    for row in table:
        sink.write("manipulability", row["family"], row["class_id"],
                   row["cls"].params, "manipulability", row["mean"],
                   row["stderr"], cfg.reps, cfg.seed, row["ms"])
    sink.close()
    data_path = os.path.join(cfg.outdir, "manipulability_data.csv")
    _write_plain_csv(data_path, ("class_id", "family", "mean", "stderr"), table)
    return {"data": data_path, "rows": table}


def run_scatter(cfg: ExperimentConfig) -> dict:
    """Joined capacity and manipulability table with the selected class starred."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))
    caps = {r["class_id"]: r for r in _capacity_table(cfg, dataset)}
    manis = {r["class_id"]: r for r in _manipulability_table(cfg, dataset,
                                                            cfg.budget_fraction)}
    h_opts = {fam.family_kind: select_h_opt(fam, dataset, cfg.folds, cfg.seed).class_id()
              for fam in _families(cfg)}
    points = []
    for cid, cap in caps.items():
        man = manis[cid]
        points.append({
            "class_id": cid, "family": cap["family"],
            "capacity": cap["mean"], "capacity_stderr": cap["stderr"],
            "manipulability": man["mean"], "manipulability_stderr": man["stderr"],
            "is_h_opt": cid == h_opts[cap["family"]],
        })
        sink.write("scatter", cap["family"], cid, cap["cls"].params,
                   "capacity", cap["mean"], cap["stderr"], cfg.capacity_draws, cfg.seed)
        sink.write("scatter", cap["family"], cid, cap["cls"].params,
                   "manipulability", man["mean"], man["stderr"], cfg.reps, cfg.seed)
        sink.write("scatter", cap["family"], cid, cap["cls"].params,
                   "is_h_opt", float(points[-1]["is_h_opt"]), 0.0, 1, cfg.seed)
    sink.close()
    data_path = os.path.join(cfg.outdir, "scatter_data.csv")
    svg_path = os.path.join(cfg.outdir, "scatter.svg")
    _write_plain_csv(data_path, ("class_id", "family", "capacity", "capacity_stderr",
                                 "manipulability", "manipulability_stderr", "is_h_opt"),
                     points)
    figures.scatter_chart(points, svg_path)
    return {"data": data_path, "svg": svg_path, "rows": points}


def run_budget_sweep(cfg: ExperimentConfig) -> dict:
    """Manipulability vs budget for each family's selected, lowest- and
    highest-capacity classes."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))
    caps = _capacity_table(cfg, dataset)
    rows = []
    for fam in _families(cfg):
        own = [r for r in caps if r["family"] == fam.family_kind]
        lo = min(own, key=lambda r: (r["mean"], r["class_id"]))
        hi = max(own, key=lambda r: (r["mean"], r["class_id"]))
        opt_id = select_h_opt(fam, dataset, cfg.folds, cfg.seed).class_id()
        opt = next(r for r in own if r["class_id"] == opt_id)
        roles = [("h_opt", opt), ("h_low_capacity", lo), ("h_high_capacity", hi)]
        for role, rec in roles:
            for bf in cfg.budget_fractions:
                est = manipulability(rec["cls"], dataset, bf, cfg.reps, cfg.seed)
                rows.append({"family": fam.family_kind, "role": role,
                             "class_id": rec["class_id"], "budget_fraction": bf,
                             "manipulability": est.mean, "stderr": est.stderr})
                sink.write("budget_sweep", fam.family_kind, rec["class_id"],
                           {**rec["cls"].params, "role": role, "budget_fraction": bf},
                           "manipulability", est.mean, est.stderr, cfg.reps, cfg.seed)
    sink.close()
    data_path = os.path.join(cfg.outdir, "budget_sweep_data.csv")
    svg_path = os.path.join(cfg.outdir, "budget_sweep.svg")
    _write_plain_csv(data_path, ("family", "role", "class_id", "budget_fraction",
                                 "manipulability", "stderr"), rows)
    figures.budget_sweep_chart(rows, svg_path)
    return {"data": data_path, "svg": svg_path, "rows": rows}


def run_coe(cfg: ExperimentConfig) -> dict:
    """Cost of exhaustion per family with a bootstrap confidence interval."""
    _echo_config(cfg)
    dataset = build_dataset(cfg)
    sink = ResultsSink(os.path.join(cfg.outdir, "results.csv"))
    rows = []
    for fam in _families(cfg):
        report, ms = _timed(cfg, cost_of_exhaustion, fam, dataset,
                            cfg.budget_fraction, cfg.reps, cfg.seed, cfg.folds)
        rows.append({"family": fam.family_kind, "cost": report.cost_of_exhaustion,
                     "ci_low": report.ci_low, "ci_high": report.ci_high,
                     "h_acc": report.h_acc_id, "h_mu": report.h_mu_id,
                     "h_opt": report.h_opt_id})
        for metric, value in (("cost_of_exhaustion", report.cost_of_exhaustion),
                              ("coe_ci_low", report.ci_low),
                              ("coe_ci_high", report.ci_high)):
            sink.write("coe", fam.family_kind, fam.family_kind, {}, metric,
                       value, 0.0, cfg.reps, cfg.seed, ms)
    sink.close()
    data_path = os.path.join(cfg.outdir, "coe_data.csv")
    svg_path = os.path.join(cfg.outdir, "coe.svg")
    _write_plain_csv(data_path, ("family", "cost", "ci_low", "ci_high",
                                 "h_acc", "h_mu", "h_opt"), rows)
    figures.coe_chart(rows, svg_path)
    return {"data": data_path, "svg": svg_path, "rows": rows}

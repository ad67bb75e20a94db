"""Seeded repetitions, mean/std aggregation and the reproduction drivers.

Repetition ``i`` of every cell uses ``seed = base_seed + i`` both to redraw a
generated dataset and to split it, so cells sharing a seed schedule see the
same data. Failed repetitions (degenerate splits) are counted, never
resampled.
"""
import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import DataError, resolve_source
from .detectors import DetectorSpec
from .protocols import EvalResult, ProtocolConfig, ProtocolFailure, run_injection_sweep, run_protocol

METRICS = ("f1", "auc", "avpr")


class ExperimentError(DataError):
    pass


@dataclass(frozen=True)
class Cell:
    label: str
    config: ProtocolConfig
    source: object = None


@dataclass(frozen=True)
class ExperimentSpec:
    source: object
    cells: tuple
    repetitions: int = 100
    base_seed: int = 0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ExperimentError("repetitions must be >= 1")
        if not self.cells:
            raise ExperimentError("an experiment needs at least one cell")


@dataclass
class CellSummary:
    label: str
    config: dict
    results: list
    failures: list = field(default_factory=list)

    @property
    def n_success(self):
        return sum(r is not None for r in self.results)

    @property
    def n_failed(self):
        return len(self.results) - self.n_success

    def values(self, metric):
        return np.array([getattr(r, metric) for r in self.results if r is not None], dtype=float)

    def mean(self, metric):
        v = self.values(metric)
        return float(np.mean(v)) if v.size else math.nan

    def std(self, metric):
        """Sample standard deviation; 0 for a single successful run."""
        v = self.values(metric)
        if v.size == 0:
            return math.nan
        return float(np.std(v, ddof=1)) if v.size > 1 else 0.0

    @property
    def single_run(self):
        return self.n_success == 1


@dataclass
class RunSummary:
    cells: list
    repetitions: int
    base_seed: int

    def cell(self, label):
        for c in self.cells:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_dict(self):
        return {
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "cells": [
                {
                    "label": c.label,
                    "config": c.config,
                    "summary": {
                        m: {"mean": c.mean(m), "std": c.std(m)} for m in METRICS
                    },
                    "n_success": c.n_success,
                    "n_failed": c.n_failed,
                    "single_run": c.single_run,
                    "failures": c.failures,
                    "results": [None if r is None else r.to_dict() for r in c.results],
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, d):
        cells = [
            CellSummary(
                c["label"],
                c["config"],
                [None if r is None else EvalResult.from_dict(r) for r in c["results"]],
                list(c.get("failures", [])),
            )
            for c in d["cells"]
        ]
        return cls(cells, d["repetitions"], d["base_seed"])

    def equals(self, other):
        return json.dumps(self.to_dict(), sort_keys=True) == json.dumps(other.to_dict(), sort_keys=True)


def _run_one(task):
    source, config, seed = task
    dataset = resolve_source(source, seed=seed)
    try:
        return run_protocol(dataset, config.with_seed(seed)), None
    except ProtocolFailure as exc:
        return None, exc.reason


def _map(fn, tasks, jobs):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def default_jobs():
    return os.cpu_count() or 1


def repeat(spec, jobs=1, allow_failed_cells=False):
    """Run every cell ``spec.repetitions`` times and aggregate."""
    tasks = []
    for cell in spec.cells:
        source = cell.source if cell.source is not None else spec.source
        for i in range(spec.repetitions):
            tasks.append((source, cell.config, spec.base_seed + i))
    outcomes = _map(_run_one, tasks, jobs)
    cells = []
    for ci, cell in enumerate(spec.cells):
        chunk = outcomes[ci * spec.repetitions:(ci + 1) * spec.repetitions]
        summary = CellSummary(
            cell.label,
            cell.config.to_kv() | {"source": str(cell.source if cell.source is not None else spec.source)},
            [r for r, _ in chunk],
            [reason for _, reason in chunk if reason is not None],
        )
        if summary.n_success == 0 and not allow_failed_cells:
            raise ExperimentError(f"cell {cell.label!r}: all {spec.repetitions} repetitions failed ({summary.failures[0]})")
        cells.append(summary)
    return RunSummary(cells, spec.repetitions, spec.base_seed)


TABLE1_COLUMNS = (
    ("alg1/0.20/estimated", "unbiased", 0.20, "estimated"),
    ("alg2/0.20/estimated", "recycling", 0.20, "estimated"),
    ("alg2/0.05/estimated", "recycling", 0.05, "estimated"),
    ("alg2/0.05/optimal", "recycling", 0.05, "optimal"),
)


def table1(source, detector=None, repetitions=100, base_seed=0, jobs=1):
    """Four protocol columns: strict split, recycling, small test set, optimal threshold."""
    detector = detector or DetectorSpec()
    cells = tuple(
        Cell(label, ProtocolConfig(protocol=p, beta=b, threshold_policy=pol, detector=detector))
        for label, p, b, pol in TABLE1_COLUMNS
    )
    return repeat(ExperimentSpec(source, cells, repetitions, base_seed), jobs=jobs, allow_failed_cells=True)


DEFAULT_DIFFICULTY_CELLS = (("easy", 0.05), ("easy", 0.20), ("hard", 0.20))


def difficulty_demo(easy_radius=2.5, hard_radius=2.1, contamination_pairs=DEFAULT_DIFFICULTY_CELLS,
                    n_total=2000, noise_sigma=0.1, repetitions=100, beta=0.2, base_seed=0,
                    detector=None, jobs=1):
    """Recycling protocol on circle datasets of two radii and several contaminations."""
    if easy_radius <= 0 or hard_radius <= 0:
        raise ExperimentError("radii must be positive")
    config = ProtocolConfig(protocol="recycling", beta=beta, detector=detector or DetectorSpec(kind="gaussian"))
    radii = {"easy": easy_radius, "hard": hard_radius}
    cells = []
    for which, alpha in contamination_pairs:
        n_anom = int(math.floor(alpha * n_total + 0.5))
        src = f"circle:{n_total - n_anom},{n_anom},{radii[which]},{noise_sigma}"
        cells.append(Cell(f"{which}/{alpha:.2f}", config, src))
    return repeat(ExperimentSpec(None, tuple(cells), repetitions, base_seed), jobs=jobs)


def _sweep_one(task):
    source, beta, counts, config, seed = task
    dataset = resolve_source(source, seed=seed)
    return run_injection_sweep(dataset, beta, counts, config.with_seed(seed))


def repeat_injection_sweep(source, beta, anomaly_counts, config, repetitions=100, base_seed=0, jobs=1):
    """Mean/std of each metric per anomaly count over seeded repetitions.

    Returns ``{count: {metric: (mean, std)}}``; counts with no defined
    result (count 0) map to ``None``.
    """
    counts = list(anomaly_counts)
    tasks = [(source, beta, counts, config, base_seed + i) for i in range(repetitions)]
    runs = _map(_sweep_one, tasks, jobs)
    out = {}
    for j, c in enumerate(counts):
        res = [run[j][1] for run in runs if run[j][1] is not None]
        if not res:
            out[c] = None
            continue
        out[c] = {}
        for m in METRICS:
            v = np.array([getattr(r, m) for r in res])
            out[c][m] = (float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0)
    return out


def emit_report(summary, fmt, path):
    """Write a summary as CSV (one row per cell and metric) or full JSON."""
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(summary.to_dict(), indent=2), encoding="utf-8")
    elif fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["cell", "metric", "mean", "std", "n_success", "n_failed"])
            for c in summary.cells:
                for m in METRICS:
                    w.writerow([c.label, m, f"{c.mean(m):.3f}", f"{c.std(m):.3f}", c.n_success, c.n_failed])
    else:
        raise ExperimentError(f"unknown report format {fmt!r}")
    return path


def load_report(path):
    return RunSummary.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def format_summary(summary, metrics=("f1", "avpr", "auc")):
    """Plain-text table, one column per cell, ``mean (± std)`` entries."""
    labels = [c.label for c in summary.cells]
    width = max(20, *(len(lab) + 2 for lab in labels))
    lines = ["metric".ljust(8) + "".join(lab.rjust(width) for lab in labels)]
    for m in metrics:
        row = m.upper().ljust(8)
        for c in summary.cells:
            row += f"{c.mean(m):.3f} (± {c.std(m):.3f})".rjust(width)
        lines.append(row)
    fails = [f"{c.label}: {c.n_failed}" for c in summary.cells if c.n_failed]
    if fails:
        lines.append("failed runs: " + ", ".join(fails))
    return "\n".join(lines)

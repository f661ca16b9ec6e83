"""Benchmark plumbing behind the command-line interface.

Each ``cmd_*`` function reads a graph, runs one or both algorithms and writes
CSV artifacts into ``config.out_dir``.  Timing columns separate the solve
phase (``solve_seconds``) from the full run including parsing and component
finding (``total_seconds``).
"""

from __future__ import annotations

import csv
import math
import os
import time
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .driver import RunReport, baseline_centrality, run_auto_blocks, run_componentwise
from .graph import SparseGraph, parse_edge_list, transpose
from .kernels import SolveOptions

__all__ = [
    "ALGORITHMS",
    "RunConfig",
    "RunResult",
    "SweepResult",
    "run_algorithm",
    "warm_up",
    "write_rank_csv",
    "cmd_compute",
    "cmd_compare",
    "cmd_sweep",
]

ALGORITHMS = ("baseline", "componentwise", "auto-blocks")


@dataclass(frozen=True)
class RunConfig:
    input: Optional[Path] = None
    algorithm: str = "componentwise"
    tol: float = 1e-9
    max_iter: int = 10000
    rowsum_skip: bool = True
    half_discard: bool = True
    batch_singles: bool = True
    parallel_levels: bool = False
    out_dir: Path = Path(".")
    seed: int = 0
    repeat: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.repeat < 1:
            raise ValueError("repeat must be at least 1")

    def options(self, tol: float | None = None) -> SolveOptions:
        return SolveOptions(tol=self.tol if tol is None else tol, max_iter=self.max_iter,
                            rowsum_skip=self.rowsum_skip, half_discard=self.half_discard,
                            batch_singles=self.batch_singles,
                            parallel_levels=self.parallel_levels)


@dataclass
class RunResult:
    algorithm: str
    vector: np.ndarray
    iterations: int
    solve_seconds: float
    prepare_seconds: float
    converged: bool
    report: Optional[RunReport] = None


@dataclass
class SweepResult:
    """One row per (tol, algorithm)."""

    rows: list = field(default_factory=list)

    def to_csv(self, dest) -> None:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["tol", "algorithm", "solve_seconds", "total_seconds",
                        "total_iterations"])
            for r in self.rows:
                w.writerow([f"{r['tol']:g}", r["algorithm"], f"{r['solve_seconds']:.6f}",
                            f"{r['total_seconds']:.6f}", r["total_iterations"]])


def run_algorithm(g: SparseGraph, algorithm: str, opts: SolveOptions) -> RunResult:
    """Run one algorithm; times exclude parsing."""
    if algorithm == "baseline":
        t0 = time.perf_counter()
        gt = g if g.transposed else transpose(g)
        t1 = time.perf_counter()
        x, out = baseline_centrality(gt, opts)
        t2 = time.perf_counter()
        return RunResult(algorithm, x, out.iterations, t2 - t1, t1 - t0, out.converged)
    run = run_componentwise if algorithm == "componentwise" else run_auto_blocks
    x, rep = run(g, opts)
    return RunResult(algorithm, x, rep.total_iterations, rep.solve_seconds,
                     rep.prepare_seconds, rep.converged, rep)


_warm = False


def warm_up() -> None:
    """Compile the jitted kernels once so timings exclude compilation."""
    global _warm
    if _warm:
        return
    from .graph import from_edges
    g = from_edges([0, 1, 1, 2, 2, 3], [1, 0, 2, 2, 3, 3], n=4)
    opts = SolveOptions(tol=1e-6)
    run_componentwise(g, opts)
    run_componentwise(g, replace(opts, parallel_levels=True))
    baseline_centrality(g, opts)
    _warm = True


def _timed(g, algorithm, opts, repeat):
    """Best of ``repeat`` runs (by solve time)."""
    best = None
    for _ in range(repeat):
        res = run_algorithm(g, algorithm, opts)
        if best is None or res.solve_seconds < best.solve_seconds:
            best = res
    return best


def _read(config: RunConfig):
    if config.input is None:
        raise ValueError("--input is required")
    t0 = time.perf_counter()
    g = parse_edge_list(config.input)
    return g, time.perf_counter() - t0


def write_rank_csv(g: SparseGraph, scores, dest) -> None:
    """``vertex_label,score`` sorted by descending score, then ascending label."""
    scores = np.asarray(scores, dtype=np.float64)
    order = np.lexsort((g.labels, -scores))
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex_label", "score"])
        for i in order.tolist():
            w.writerow([g.labels[i], f"{scores[i]:.12g}"])


def _out(config: RunConfig, name: str) -> Path:
    os.makedirs(config.out_dir, exist_ok=True)
    return Path(config.out_dir) / name


def cmd_compute(config: RunConfig) -> RunResult:
    """Write ``rank.csv`` (and ``report.csv`` unless running the baseline)."""
    g, _ = _read(config)
    res = run_algorithm(g, config.algorithm, config.options())
    write_rank_csv(g, res.vector, _out(config, "rank.csv"))
    if res.report is not None:
        res.report.to_csv(_out(config, "report.csv"))
    if not res.converged:
        warnings.warn("iteration limit reached before convergence", RuntimeWarning)
    return res


def cmd_compare(config: RunConfig) -> dict:
    """Run baseline and componentwise at one tolerance.

    Writes ``compare.csv`` with one row per componentwise record next to the
    baseline iteration count, and returns a summary dict.
    """
    g, _ = _read(config)
    opts = config.options()
    base = run_algorithm(g, "baseline", opts)
    comp = run_algorithm(g, "componentwise", opts)
    diff = float(np.max(np.abs(base.vector - comp.vector)))
    with open(_out(config, "compare.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["component", "level", "size", "iterations", "status",
                    "baseline_iterations"])
        for r in comp.report.records:
            w.writerow([r.component, r.level, r.size, r.iterations, r.status,
                        base.iterations])
    records = comp.report.records
    summary = {
        "tol": config.tol,
        "baseline_iterations": base.iterations,
        "componentwise_total_iterations": comp.iterations,
        "componentwise_max_iterations": max((r.iterations for r in records), default=0),
        "components": comp.report.n_components,
        "max_abs_diff": diff,
        "baseline_converged": base.converged,
        "componentwise_converged": comp.converged,
    }
    with open(_out(config, "compare_summary.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in summary.items():
            w.writerow([k, f"{v:.12g}" if isinstance(v, float) else v])
    return summary


def cmd_sweep(config: RunConfig, tols, algorithms=("baseline", "componentwise")) -> SweepResult:
    """Time every algorithm at every tolerance and write ``sweep.csv``."""
    tols = sorted({float(t) for t in tols}, reverse=True)
    if len(tols) < 2:
        raise ValueError("a sweep needs at least two tolerances")
    if any(not t > 0 or math.isnan(t) for t in tols):
        raise ValueError("tolerances must be positive")
    g, parse_seconds = _read(config)
    warm_up()
    result = SweepResult()
    for tol in tols:
        for algo in algorithms:
            res = _timed(g, algo, config.options(tol), config.repeat)
            result.rows.append({
                "tol": tol,
                "algorithm": algo,
                "solve_seconds": res.solve_seconds,
                "total_seconds": parse_seconds + res.prepare_seconds + res.solve_seconds,
                "total_iterations": res.iterations,
            })
    result.to_csv(_out(config, "sweep.csv"))
    return result

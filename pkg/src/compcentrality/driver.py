"""Componentwise eigenvector centrality.

Components are solved level by level, from the highest condensation level
down to the sinks.  A component without incoming rank is solved by power
iteration; one that receives rank from solved components is solved with the
series ``(1/lam) sum_i (W/lam)^i v`` against the running dominant eigenvalue
``lam`` and falls back to power iteration when that series does not converge.

Every non-zero component vector belongs to a growth class ``(lam, p)``: on the
whole graph its iterates grow like ``k^p lam^k``.  Only components in the
largest class survive; a component whose own eigenvalue ties ``lam`` and that
is fed by class ``p`` moves to class ``p + 1``.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit
from scipy.sparse.csgraph import connected_components

from . import kernels as K
from .condensation import (BlockLayout, Decomposition, build_layout, find_components)
from .graph import GraphSlice, SparseGraph, from_edges, induced_subgraph, transpose
from .kernels import IterationOutcome, SolveOptions

__all__ = [
    "DegenerateGraphError",
    "GlobalState",
    "ComponentRecord",
    "RunReport",
    "BlockPartition",
    "baseline_centrality",
    "run_componentwise",
    "solve_layout",
    "component_centrality",
    "skip_by_row_sum_bound",
    "early_discard",
    "propagate_weights",
    "zero_out",
    "merge_isolated_blocks",
    "detect_blocks",
    "run_auto_blocks",
]

BATCH = "batch"


class DegenerateGraphError(ValueError):
    """The graph has no positive dominant eigenvalue (its adjacency is nilpotent)."""


@dataclass
class ComponentRecord:
    component: int
    level: int
    size: int
    iterations: int
    lambda_est: float
    status: str
    converged: bool = True
    zeroed: bool = False


@dataclass
class RunReport:
    """Per-component iteration statistics of one componentwise run.

    Batched 1-vertex components contribute a single record per level with
    status ``batch``; ``size`` is then the member count.
    """

    records: list
    lambda_max: float
    order: int = 0
    prepare_seconds: float = 0.0
    solve_seconds: float = 0.0
    blocks: list = field(default_factory=list)
    n_components: int = 0

    @property
    def total_iterations(self) -> int:
        return sum(r.iterations for r in self.records)

    @property
    def wall_seconds(self) -> float:
        return self.prepare_seconds + self.solve_seconds

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.records)

    def to_csv(self, dest) -> None:
        own = not hasattr(dest, "write")
        fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["component", "level", "size", "iterations", "lambda", "status",
                        "zeroed", "converged"])
            for r in self.records:
                w.writerow([r.component, r.level, r.size, r.iterations,
                            f"{r.lambda_est:.12g}", r.status, int(r.zeroed),
                            int(r.converged)])
        finally:
            if own:
                fh.close()


@dataclass
class GlobalState:
    """Mutable state of the level loop.

    ``centrality`` and ``pending_weights`` are indexed in layout order when a
    layout is attached.  ``classes`` maps each live component to its growth
    class ``(lambda, order)``; ``bounds`` maps components to their row range.
    """

    lambda_max: float = -1.0
    order: int = 0
    centrality: np.ndarray = field(default_factory=lambda: np.zeros(0))
    pending_weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    per_component: dict = field(default_factory=dict)
    classes: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    zeroed: set = field(default_factory=set)
    level_best: float = -1.0
    tie_rtol: float = 1e-9

    @classmethod
    def for_size(cls, n: int, tie_rtol: float = 1e-9) -> "GlobalState":
        return cls(centrality=np.zeros(n), pending_weights=np.zeros(n), tie_rtol=tie_rtol)

    @property
    def reference_lambda(self) -> float:
        """Largest eigenvalue known so far, including the level in progress."""
        return max(self.lambda_max, self.level_best)


def _cmp_class(a: tuple, b: tuple, rtol: float) -> int:
    la, pa = a
    lb, pb = b
    scale = max(abs(la), abs(lb))
    if abs(la - lb) > rtol * scale:
        return 1 if la > lb else -1
    return (pa > pb) - (pa < pb)


# ---------------------------------------------------------------------------
# component-level operations

def skip_by_row_sum_bound(slice_or_bound, state: GlobalState) -> bool:
    """True if the slice's largest row sum of ``A^T`` is below the known maximum.

    The dominant eigenvalue of a non-negative matrix never exceeds its largest
    row sum, so such a component (with zero input) cannot matter.
    """
    if isinstance(slice_or_bound, (GraphSlice, SparseGraph)):
        a = slice_or_bound.matrix
        transposed = (slice_or_bound.parent.transposed if isinstance(slice_or_bound, GraphSlice)
                      else slice_or_bound.transposed)
        sums = np.asarray(a.sum(axis=1 if transposed else 0)).ravel()
        bound = float(sums.max()) if len(sums) else 0.0
    else:
        bound = float(slice_or_bound)
    return bound < state.reference_lambda


def early_discard(lambda_estimates, state: GlobalState, opts: SolveOptions) -> bool:
    """True if any checkpoint estimate is below ``half_factor * lambda_max``."""
    ref = opts.half_factor * state.reference_lambda
    return any(est < ref for est in np.atleast_1d(lambda_estimates))


def _solve_block(op, s: int, size: int, incoming: np.ndarray, bound: float,
                 state: GlobalState, opts: SolveOptions, reference: float):
    """Solve one component occupying rows ``[s, s+size)`` of ``op``.

    Returns the outcome (vector in driver units) and the growth class, or
    ``None`` for a zero result.
    """
    indptr, diag_ptr, indices, data = op
    tie = opts.tie_tolerance
    lam = state.lambda_max
    if incoming.sum() < opts.zero_input_tol:
        if opts.rowsum_skip and bound < reference:
            return IterationOutcome(np.zeros(size), 0.0, 0, K.SKIPPED_BOUND), None
        half = opts.half_factor * reference if opts.half_discard else -math.inf
        x = np.full(size, 1.0 / size)
        res = K._power_block(indptr, diag_ptr, indices, data, s, x, opts.tol, opts.max_iter,
                             np.asarray(opts.eig_check_at, np.int64), half)
        out = K._power_outcome(*res)
        if out.status in (K.ZERO, K.DISCARDED_HALF):
            out.vector = np.zeros(size)
            return out, None
        if out.lambda_est < reference * (1 - tie):
            out.vector = np.zeros(size)
            out.status = K.ZERO
            return out, None
        return out, (out.lambda_est, 0)

    # rank flows in from solved components, so lam > 0 here
    total, term, it, code = K._series_block(indptr, diag_ptr, indices, data, s, incoming,
                                            lam, opts.tol, opts.max_iter, opts.series_check_at)
    if code != K._DIVERGE:
        out = IterationOutcome(total / lam, lam, it, K.CONVERGED_SERIES, code == K._OK)
        return out, (lam, state.order)

    mass = term.sum()
    x = term / mass
    res = K._power_block(indptr, diag_ptr, indices, data, s, x, opts.tol,
                         max(opts.max_iter - it, 1), np.zeros(0, np.int64), -math.inf)
    power = K._power_outcome(*res)
    its = it + power.iterations
    own = power.lambda_est
    if own < lam * (1 - tie):
        # the checkpoint misfired on a slowly decaying series
        total, term, it2, code = K._series_block(indptr, diag_ptr, indices, data, s, incoming,
                                                 lam, opts.tol, max(opts.max_iter - its, 1), 0)
        out = IterationOutcome(total / lam, lam, its + it2, K.CONVERGED_SERIES, code == K._OK)
        return out, (lam, state.order)
    if own <= lam * (1 + tie):
        order = state.order + 1
        log_scale = math.log(mass) + power.log_growth - power.iterations * math.log(lam)
        vec = power.vector * (math.exp(log_scale) / (lam * order))
        out = IterationOutcome(vec, own, its, K.CONVERGED_POWER, power.converged,
                               power.log_growth)
        return out, (lam, order)
    out = IterationOutcome(power.vector, own, its, K.CONVERGED_POWER, power.converged,
                           power.log_growth)
    return out, (own, 0)


def component_centrality(slice_: GraphSlice, incoming, state: GlobalState,
                         opts: SolveOptions = SolveOptions()) -> IterationOutcome:
    """Solve one strongly connected slice given its incoming rank.

    With (near) zero input the slice is solved by power iteration and zeroed if
    its eigenvalue is below ``state.lambda_max``.  Otherwise the damped series
    against ``state.lambda_max`` is summed (scaled by ``1/lambda_max``); when it
    does not converge, power iteration takes over from the latest series term.

    The returned vector is in driver units: unit L1 mass for a newly dominant
    component, series or tie-scaled mass otherwise.
    """
    op = K._operator(slice_)
    size = slice_.n
    v = np.asarray(incoming, dtype=np.float64).ravel()
    if len(v) != size:
        raise ValueError("incoming weights must match the slice size")
    sums = np.bincount(np.repeat(np.arange(size), np.diff(op[0])), weights=op[3],
                       minlength=size)
    bound = float(sums.max()) if size else 0.0
    out, _ = _solve_block(op, 0, size, v, bound, state, opts, state.reference_lambda)
    return out


def propagate_weights(state: GlobalState, layout: BlockLayout, comps) -> None:
    """Collect the rank donated to ``comps`` along their incoming boundary edges.

    Fills ``state.pending_weights`` on the components' rows with
    ``sum(w * centrality[u])`` over boundary edges ``u -> v``.  Zeroed or
    skipped donors hold zero centrality and therefore donate nothing.
    """
    for c in comps:
        s, e = int(layout.start[c]), int(layout.end[c])
        _gather(layout.indptr, layout.diag_ptr, layout.indices, layout.data, s, e,
                state.centrality, state.pending_weights)


@njit(cache=True, nogil=True)
def _gather(indptr, diag_ptr, indices, data, s, e, x, out):
    for r in range(s, e):
        acc = 0.0
        for k in range(indptr[r], diag_ptr[r]):
            acc += data[k] * x[indices[k]]
        out[r] = acc


def zero_out(state: GlobalState, new_lambda: float, new_order: int = 0) -> list:
    """Adopt a new dominant class and zero every live component below it.

    Components whose eigenvalue ties ``new_lambda`` (relative ``state.tie_rtol``)
    and whose order is not lower are kept.  Returns the zeroed component ids.
    """
    new = (new_lambda, new_order)
    dropped = []
    for c, cls in list(state.classes.items()):
        if _cmp_class(cls, new, state.tie_rtol) < 0:
            s, e = state.bounds[c]
            state.centrality[s:e] = 0.0
            del state.classes[c]
            state.zeroed.add(c)
            dropped.append(c)
    state.lambda_max = new_lambda
    state.order = new_order
    return dropped


# ---------------------------------------------------------------------------
# level loop

def _batch_singles(layout: BlockLayout, state: GlobalState, comps, opts: SolveOptions,
                   reference: float):
    """Closed-form solve for the 1-vertex components of one level."""
    comps = np.asarray(comps, dtype=np.int64)
    rows = layout.start[comps]
    w = state.pending_weights[rows]
    a = layout.self_loop[rows]
    lam, p = state.lambda_max, state.order
    tie = opts.tie_tolerance
    ranks = np.zeros(len(comps))
    classes: list = [None] * len(comps)
    fed = w >= opts.zero_input_tol

    below = fed & (a < lam * (1 - tie))
    ranks[below] = K.single_vertex_batch(a[below], w[below], lam) / lam
    at_or_above = fed & ~below
    for i in np.flatnonzero(below):
        classes[i] = (lam, p)
    for i in np.flatnonzero(at_or_above):
        if a[i] <= lam * (1 + tie):
            ranks[i] = w[i] / (lam * (p + 1))
            classes[i] = (lam, p + 1)
        else:
            ranks[i] = 1.0
            classes[i] = (float(a[i]), 0)
    for i in np.flatnonzero(~fed):
        if a[i] > 0 and a[i] >= reference * (1 - tie):
            ranks[i] = 1.0
            classes[i] = (float(a[i]), 0)
    state.centrality[rows] = ranks
    return classes


def _resolve_level(state: GlobalState, units: list, opts: SolveOptions) -> None:
    """Apply the dominant-class check after a level; ``units`` holds (comp, class)."""
    rtol = state.tie_rtol
    current = (state.lambda_max, state.order)
    best = None
    for _, cls in units:
        if cls is not None and (best is None or _cmp_class(cls, best, rtol) > 0):
            best = cls
    if best is not None and (state.lambda_max <= 0 or _cmp_class(best, current, rtol) > 0):
        zero_out(state, *best)
        current = best
    for c, cls in units:
        if cls is None:
            continue
        if _cmp_class(cls, current, rtol) < 0:
            s, e = state.bounds[c]
            state.centrality[s:e] = 0.0
            state.zeroed.add(c)
        else:
            state.classes[c] = cls


def solve_layout(layout: BlockLayout, opts: SolveOptions = SolveOptions()):
    """Run the level loop on a prepared layout.

    Returns ``(centrality in layout order, records, state)``; the centrality
    is not normalized.
    """
    d = layout.decomp
    state = GlobalState.for_size(layout.n, opts.tie_tolerance)
    state.bounds = {c: (int(layout.start[c]), int(layout.end[c]))
                    for c in range(d.n_components)}
    op = (layout.indptr, layout.diag_ptr, layout.indices, layout.data)
    sizes = d.sizes
    records: list = []
    comp_record: dict = {}
    pool = ThreadPoolExecutor() if opts.parallel_levels else None

    def solve(c, reference):
        s, e = state.bounds[c]
        return _solve_block(op, s, e - s, state.pending_weights[s:e].copy(),
                            float(layout.block_bound[c]), state, opts, reference)

    try:
        for level in sorted(d.level_index, reverse=True):
            comps = d.level_index[level]
            propagate_weights(state, layout, comps)
            state.level_best = -1.0
            if opts.batch_singles:
                multi = [c for c in comps if sizes[c] > 1]
                singles = [c for c in comps if sizes[c] == 1]
            else:
                multi, singles = list(comps), []
            units = []
            if pool is not None:
                ref = state.lambda_max
                results = list(pool.map(lambda c: solve(c, ref), multi))
            else:
                results = []
                for c in multi:
                    res = solve(c, state.reference_lambda)
                    cls = res[1]
                    if cls is not None and cls[1] == 0:
                        state.level_best = max(state.level_best, cls[0])
                    results.append(res)
            for c, (out, cls) in zip(multi, results):
                s, e = state.bounds[c]
                state.centrality[s:e] = out.vector
                state.per_component[c] = out
                units.append((c, cls))
                rec = ComponentRecord(c, level, int(sizes[c]), out.iterations,
                                      float(out.lambda_est), out.status, out.converged)
                records.append(rec)
                comp_record[c] = rec
            if singles:
                classes = _batch_singles(layout, state, singles, opts, state.reference_lambda)
                rec = ComponentRecord(min(singles), level, len(singles), 1,
                                      float(max(state.lambda_max, 0.0)), BATCH)
                records.append(rec)
                for c, cls in zip(singles, classes):
                    units.append((c, cls))
                    comp_record[c] = rec
            _resolve_level(state, units, opts)
    finally:
        if pool is not None:
            pool.shutdown()

    for c in state.zeroed:
        comp_record[c].zeroed = True
    return state.centrality, records, state


def run_componentwise(g: SparseGraph, opts: SolveOptions = SolveOptions()):
    """Componentwise eigenvector centrality of ``g``.

    Returns
    -------
    vector : ndarray
        L1-normalized centrality indexed by dense vertex id.
    report : RunReport
    """
    t0 = time.perf_counter()
    decomp = find_components(g)
    layout = build_layout(g, decomp)
    t1 = time.perf_counter()
    x, records, state = solve_layout(layout, opts)
    t2 = time.perf_counter()
    total = x.sum()
    if not total > 0:
        raise DegenerateGraphError("no component has a positive dominant eigenvalue")
    vector = x[layout.inverse] / total
    report = RunReport(records, float(state.lambda_max), state.order, t1 - t0, t2 - t1,
                       n_components=decomp.n_components)
    return vector, report


def baseline_centrality(g: SparseGraph, opts: SolveOptions = SolveOptions()):
    """Power iteration on the whole graph from the uniform vector.

    Returns ``(vector, outcome)`` with the vector L1-normalized.
    """
    out = K.power_iteration(g, None, opts)
    if out.status == K.ZERO:
        raise DegenerateGraphError("adjacency matrix is nilpotent")
    return out.vector, out


# ---------------------------------------------------------------------------
# disconnected blocks

@dataclass(frozen=True)
class BlockPartition:
    """Weakly connected blocks of a graph; ``sizes[i]`` is k_i, ``q`` their sum."""

    blocks: tuple
    sizes: np.ndarray
    q: int


def detect_blocks(g: SparseGraph) -> BlockPartition:
    """Weakly connected components, ordered by smallest vertex id."""
    _, labels = connected_components(g.matrix, directed=True, connection="weak")
    order = np.argsort(labels, kind="stable")
    counts = np.bincount(labels)
    groups = np.split(order, np.cumsum(counts)[:-1])
    groups.sort(key=lambda b: int(b[0]))
    blocks = tuple(np.sort(b) for b in groups)
    sizes = np.array([len(b) for b in blocks])
    return BlockPartition(blocks, sizes, int(sizes.sum()))


def merge_isolated_blocks(partition: BlockPartition, vectors) -> np.ndarray:
    """Global vector with block ``i`` holding ``(k_i / q) * x_i``.

    Each ``x_i`` is rescaled to unit L1 mass first, so block masses are exactly
    ``k_i / q``.
    """
    sizes = np.asarray(partition.sizes)
    if int(sizes.sum()) != partition.q:
        raise ValueError("block sizes do not add up to q")
    if len(vectors) != len(partition.blocks):
        raise ValueError("need one vector per block")
    out = np.zeros(partition.q)
    for verts, k, x in zip(partition.blocks, sizes, vectors):
        x = np.asarray(x, dtype=np.float64)
        if len(x) != k or len(verts) != k:
            raise ValueError("vector length differs from block size")
        out[verts] = (k / partition.q) * (x / x.sum())
    return out


def _subgraph(g: SparseGraph, verts) -> SparseGraph:
    sl = induced_subgraph(transpose(g) if g.transposed else g, verts)
    coo = sl.matrix.tocoo()
    return from_edges(coo.row, coo.col, coo.data, n=len(verts), labels=g.labels[verts])


def run_auto_blocks(g: SparseGraph, opts: SolveOptions = SolveOptions(),
                    lambda_rtol: float = 1e-9):
    """Componentwise run that merges disconnected equal-eigenvalue blocks.

    When ``g`` splits into several weakly connected blocks whose dominant
    eigenvalues agree within ``lambda_rtol``, each block is solved on its own
    and the results are combined with :func:`merge_isolated_blocks`.
    Otherwise this is :func:`run_componentwise`.
    """
    if g.transposed:
        g = transpose(g)
    partition = detect_blocks(g)
    if len(partition.blocks) > 1:
        vectors, reports, lams = [], [], []
        for verts in partition.blocks:
            try:
                x, rep = run_componentwise(_subgraph(g, verts), opts)
            except DegenerateGraphError:
                break
            vectors.append(x)
            reports.append(rep)
            lams.append(rep.lambda_max)
        else:
            top = max(lams)
            if all(abs(l - top) <= lambda_rtol * top for l in lams):
                merged = merge_isolated_blocks(partition, vectors)
                records, offset = [], 0
                blocks = []
                for i, (verts, rep) in enumerate(zip(partition.blocks, reports)):
                    for r in rep.records:
                        records.append(ComponentRecord(r.component + offset, r.level, r.size,
                                                       r.iterations, r.lambda_est, r.status,
                                                       r.converged, r.zeroed))
                    offset += rep.n_components
                    blocks.append({"block": i, "size": len(verts), "lambda": rep.lambda_max,
                                   "mass": len(verts) / partition.q})
                report = RunReport(records, top, 0,
                                   sum(r.prepare_seconds for r in reports),
                                   sum(r.solve_seconds for r in reports), blocks, offset)
                return merged, report
    return run_componentwise(g, opts)

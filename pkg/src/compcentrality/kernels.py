"""Numerical kernels: power iteration, the damped component series and the
closed form for 1-vertex components.

All iterations act on the transposed adjacency ``A^T`` (rank flows along
edges).  Vectors are non-negative and normalized in L1.  The inner loops run
under numba on a contiguous row range ``[s, s + len(x))`` of a CSR matrix whose
rows carry a ``diag_ptr`` split: only entries ``diag_ptr[r]:indptr[r+1]`` take
part, so the same loops serve a standalone matrix (``diag_ptr = indptr[:-1]``)
and one diagonal block of the block-triangular layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from numba import njit

from .graph import GraphSlice, SparseGraph

__all__ = [
    "CONVERGED_SERIES",
    "CONVERGED_POWER",
    "SKIPPED_BOUND",
    "DISCARDED_HALF",
    "ZERO",
    "DIVERGED",
    "SolveOptions",
    "IterationOutcome",
    "power_iteration",
    "estimate_eigenvalue",
    "series_accumulate",
    "detect_divergence",
    "single_vertex_batch",
]

CONVERGED_SERIES = "converged-series"
CONVERGED_POWER = "converged-power"
SKIPPED_BOUND = "skipped-bound"
DISCARDED_HALF = "discarded-half"
ZERO = "zero"
DIVERGED = "diverged"

# loop status codes shared with the jitted kernels
_OK, _MAXITER, _DISCARD, _ZERO, _DIVERGE = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances, iteration limits and optimization switches.

    ``tol`` bounds the max absolute change between successive normalized
    iterates (power iteration) or the max entry of the latest series term.
    ``tie_rtol`` is the relative gap under which two dominant eigenvalues are
    treated as equal; by default it follows ``tol``.
    """

    tol: float = 1e-9
    max_iter: int = 10000
    series_check_at: int = 20
    eig_check_at: tuple = (10, 20)
    half_factor: float = 0.5
    zero_input_tol: float = 1e-12
    tie_rtol: Optional[float] = None
    rowsum_skip: bool = True
    half_discard: bool = True
    batch_singles: bool = True
    parallel_levels: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.series_check_at < 2:
            raise ValueError("series_check_at must be at least 2")
        if not 0 < self.half_factor <= 1:
            raise ValueError("half_factor must lie in (0, 1]")
        if not self.zero_input_tol > 0:
            raise ValueError("zero_input_tol must be positive")
        object.__setattr__(self, "eig_check_at", tuple(int(k) for k in self.eig_check_at))

    @property
    def tie_tolerance(self) -> float:
        if self.tie_rtol is not None:
            return self.tie_rtol
        return max(1e-9, 10 * self.tol)


@dataclass
class IterationOutcome:
    """Result of one kernel run on a component-local vector.

    ``converged`` is False when the loop stopped at ``max_iter``.
    ``log_growth`` is the log of the L1 mass the iterate would carry without
    normalization, relative to the start vector; the driver uses it to scale
    components that tie with the dominant eigenvalue.
    """

    vector: np.ndarray
    lambda_est: float
    iterations: int
    status: str
    converged: bool = True
    log_growth: float = 0.0
    last_term: Optional[np.ndarray] = field(default=None, repr=False)


@njit(cache=True, nogil=True)
def _block_matvec(indptr, diag_ptr, indices, data, s, x, out):
    for i in range(len(out)):
        r = s + i
        acc = 0.0
        for k in range(diag_ptr[r], indptr[r + 1]):
            acc += data[k] * x[indices[k] - s]
        out[i] = acc


@njit(cache=True, nogil=True)
def detect_divergence(previous, current):
    """True unless ``current`` is strictly below ``previous`` (relative margin 1e-12).

    Used on term norms recorded at successive series checkpoints: equal or
    growing terms mean the series does not converge.
    """
    return not (current < previous * (1.0 - 1e-12))


@njit(cache=True, nogil=True)
def _power_block(indptr, diag_ptr, indices, data, s, x, tol, max_iter, check_at,
                 half_bound):
    n = len(x)
    y = np.empty(n)
    lam = 0.0
    log_growth = 0.0
    it = 0
    while it < max_iter:
        _block_matvec(indptr, diag_ptr, indices, data, s, x, y)
        it += 1
        g = 0.0
        for i in range(n):
            g += abs(y[i])
        if g == 0.0:
            return x, 0.0, it, _ZERO, log_growth
        lam = g
        log_growth += math.log(g)
        change = 0.0
        for i in range(n):
            v = y[i] / g
            d = abs(v - x[i])
            if d > change:
                change = d
            x[i] = v
        if change < tol:
            return x, lam, it, _OK, log_growth
        for c in check_at:
            if it == c and lam < half_bound:
                return x, lam, it, _DISCARD, log_growth
    return x, lam, it, _MAXITER, log_growth


@njit(cache=True, nogil=True)
def _series_block(indptr, diag_ptr, indices, data, s, v, lam, tol, max_iter,
                  check_every):
    n = len(v)
    t = v.copy()
    total = v.copy()
    y = np.empty(n)
    peak = 0.0
    prev = 0.0
    for i in range(n):
        peak = max(peak, abs(t[i]))
        prev += abs(t[i])
    if peak < tol:
        return total, t, 0, _OK
    it = 0
    while it < max_iter:
        _block_matvec(indptr, diag_ptr, indices, data, s, t, y)
        it += 1
        peak = 0.0
        mass = 0.0
        for i in range(n):
            t[i] = y[i] / lam
            total[i] += t[i]
            a = abs(t[i])
            mass += a
            if a > peak:
                peak = a
        if peak < tol:
            return total, t, it, _OK
        if check_every > 0 and it % check_every == 0:
            if detect_divergence(prev, mass):
                return total, t, it, _DIVERGE
            prev = mass
    return total, t, it, _MAXITER


def _operator(matrix):
    """``(indptr, diag_ptr, indices, data)`` of the iteration operator ``A^T``.

    Graphs and slices are transposed according to their orientation flag; a
    raw matrix is taken to be ``A^T`` already.
    """
    if isinstance(matrix, GraphSlice):
        a = matrix.matrix if matrix.parent.transposed else matrix.matrix.T
    elif isinstance(matrix, SparseGraph):
        a = matrix.matrix if matrix.transposed else matrix.matrix.T
    else:
        a = matrix
    a = sp.csr_matrix(a, dtype=np.float64)
    a.sort_indices()
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.nnz and a.data.min() < 0:
        raise ValueError("matrix must be non-negative")
    indptr = a.indptr.astype(np.int64)
    return indptr, indptr[:-1].copy(), a.indices.astype(np.int64), a.data


def _as_start(x0, n) -> np.ndarray:
    if x0 is None:
        return np.full(n, 1.0 / n)
    x = np.array(x0, dtype=np.float64).ravel()
    if len(x) != n:
        raise ValueError(f"start vector has length {len(x)}, expected {n}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("start vector must be finite and non-negative")
    total = x.sum()
    if total <= 0:
        raise ValueError("start vector is all zero")
    return x / total


def _power_outcome(x, lam, it, code, log_growth) -> IterationOutcome:
    if code == _ZERO:
        return IterationOutcome(x, 0.0, it, ZERO, True, log_growth)
    if code == _DISCARD:
        return IterationOutcome(x, lam, it, DISCARDED_HALF, False, log_growth)
    if code == _MAXITER and it > 0:
        # a periodic block never settles and its one-step ratio oscillates;
        # the mean growth rate over the whole run is the better estimate
        lam = math.exp(log_growth / it)
    return IterationOutcome(x, lam, it, CONVERGED_POWER, code == _OK, log_growth)


def power_iteration(matrix, x0=None, opts: SolveOptions = SolveOptions(), *,
                    half_bound: float = -math.inf) -> IterationOutcome:
    """Normalized power iteration ``x <- A^T x / |A^T x|_1``.

    Parameters
    ----------
    matrix : SparseGraph, GraphSlice or sparse matrix
        Graphs and slices are iterated with the transpose of their adjacency;
        a bare matrix is used as given.
    x0 : array_like, optional
        Non-negative start vector, uniform by default.  Only its direction
        matters.
    half_bound : float
        Stop early with status ``discarded-half`` if the eigenvalue estimate at
        an ``opts.eig_check_at`` iteration falls below this value.

    Returns
    -------
    IterationOutcome
        ``lambda_est`` is the L1 norm of the last unnormalized product.  If the
        product vanishes (nilpotent operator) the status is ``zero``.
    """
    indptr, diag_ptr, indices, data = _operator(matrix)
    n = len(indptr) - 1
    if n == 0:
        raise ValueError("empty matrix")
    x = _as_start(x0, n)
    checks = np.asarray(opts.eig_check_at, dtype=np.int64)
    res = _power_block(indptr, diag_ptr, indices, data, 0, x, opts.tol, opts.max_iter,
                       checks, float(half_bound))
    return _power_outcome(*res)


def estimate_eigenvalue(prev, next_unnormalized) -> float:
    """Growth ratio ``|A^T x|_1 / |x|_1`` of one power step."""
    prev = np.asarray(prev, dtype=np.float64)
    total = np.abs(prev).sum()
    if total == 0:
        raise ValueError("previous iterate is zero")
    return float(np.abs(np.asarray(next_unnormalized, dtype=np.float64)).sum() / total)


def series_accumulate(matrix, v, lambda_max: float, opts: SolveOptions = SolveOptions(),
                      *, check: bool = True) -> IterationOutcome:
    """Partial sums of ``sum_i (A^T / lambda_max)^i v``.

    Terms are generated by repeated products, never by matrix powers.  The sum
    stops once the latest term's max entry drops below ``opts.tol``.  With
    ``check`` set, the L1 norm of the term at every ``opts.series_check_at``-th
    iteration is compared with the previous checkpoint; a term that is not
    strictly smaller returns status ``diverged`` so the caller can fall back to
    power iteration.  ``last_term`` holds the latest term.
    """
    if not lambda_max > 0:
        raise ValueError("lambda_max must be positive")
    indptr, diag_ptr, indices, data = _operator(matrix)
    n = len(indptr) - 1
    v = np.array(v, dtype=np.float64).ravel()
    if len(v) != n:
        raise ValueError(f"input has length {len(v)}, expected {n}")
    if np.any(v < 0):
        raise ValueError("input must be non-negative")
    every = opts.series_check_at if check else 0
    total, term, it, code = _series_block(indptr, diag_ptr, indices, data, 0, v,
                                          float(lambda_max), opts.tol, opts.max_iter, every)
    status = DIVERGED if code == _DIVERGE else CONVERGED_SERIES
    return IterationOutcome(total, float(lambda_max), it, status, code == _OK,
                            last_term=term)


def single_vertex_batch(self_loop, weights, lambda_max: float) -> np.ndarray:
    """Series limit for many 1-vertex components at once.

    A vertex with self-loop weight ``a`` and injected weight ``w`` sums to
    ``w * lambda_max / (lambda_max - a)`` when ``lambda_max > a`` (just ``w``
    when ``a = 0``).  Members with ``lambda_max <= a`` get rank 1; their series
    does not converge and callers treat them with power-iteration semantics.

    ``self_loop`` may also be a ``SingleVertexGroup``.
    """
    a = np.asarray(getattr(self_loop, "self_loop_weight", self_loop), dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if a.shape != w.shape:
        raise ValueError("one weight per member required")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    ranks = np.ones_like(w)
    ok = lambda_max > a
    ranks[ok] = w[ok] * lambda_max / (lambda_max - a[ok])
    return ranks

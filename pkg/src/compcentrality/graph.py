"""Sparse directed graphs: ingestion, transposition and slicing.

Graphs are stored as CSR matrices where row ``u`` holds the outgoing edges of
``u`` (or the incoming edges when the graph is transposed).  Vertex labels from
the input are remapped to dense ids ``0..n-1`` in ascending label order.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Union

import numpy as np
import scipy.sparse as sp

__all__ = [
    "GraphFormatError",
    "SparseGraph",
    "GraphSlice",
    "from_edges",
    "parse_edge_list",
    "read_edge_list",
    "write_edge_list",
    "transpose",
    "row_sums",
    "induced_subgraph",
]


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """Immutable weighted digraph.

    Attributes
    ----------
    matrix : scipy.sparse.csr_matrix
        ``n x n`` adjacency with canonical (sorted, deduplicated) indices.
        Entry ``(u, v)`` is the weight of ``u -> v``; when ``transposed`` is
        set the stored matrix is the transpose of the original adjacency.
    labels : ndarray
        Original label of every dense id.
    transposed : bool
        Orientation flag.
    """

    matrix: sp.csr_matrix
    labels: np.ndarray
    transposed: bool = False
    _label_index: dict = field(default=None, repr=False, compare=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return int(self.matrix.nnz)

    def neighbors(self, u: int) -> np.ndarray:
        """Targets of the edges stored in row ``u``."""
        a = self.matrix
        return a.indices[a.indptr[u]:a.indptr[u + 1]]

    def weights(self, u: int) -> np.ndarray:
        a = self.matrix
        return a.data[a.indptr[u]:a.indptr[u + 1]]

    def edges(self):
        """Yield ``(source, target, weight)`` in the stored orientation."""
        a = self.matrix
        for u in range(self.n):
            for k in range(a.indptr[u], a.indptr[u + 1]):
                yield u, int(a.indices[k]), float(a.data[k])

    def edge_set(self) -> dict:
        return {(u, v): w for u, v, w in self.edges()}

    def dense_id(self, label) -> int:
        index = self._label_index
        if index is None:
            index = {lab: i for i, lab in enumerate(self.labels.tolist())}
            object.__setattr__(self, "_label_index", index)
        return index[label]


@dataclass(frozen=True, eq=False)
class GraphSlice:
    """Subgraph induced by a sorted vertex subset of ``parent``.

    ``vertices[i]`` is the global id of local vertex ``i``; ``matrix`` holds
    the internal edges in local ids and in the parent's orientation.
    """

    parent: SparseGraph
    vertices: np.ndarray
    matrix: sp.csr_matrix

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return int(self.matrix.nnz)

    def to_global(self, local):
        return self.vertices[local]

    def to_local(self, global_ids):
        """Map global ids to local ids; raises KeyError for outsiders."""
        global_ids = np.asarray(global_ids)
        pos = np.searchsorted(self.vertices, global_ids)
        pos = np.clip(pos, 0, max(len(self.vertices) - 1, 0))
        if len(self.vertices) == 0 or np.any(self.vertices[pos] != global_ids):
            raise KeyError("vertex not in slice")
        return pos


def _canonical(matrix: sp.spmatrix) -> sp.csr_matrix:
    a = sp.csr_matrix(matrix, dtype=np.float64)
    a.sum_duplicates()
    a.sort_indices()
    a.eliminate_zeros()
    return a


def from_edges(sources, targets, weights=None, n: int | None = None,
               labels=None) -> SparseGraph:
    """Build a graph from dense-id edge arrays.

    Duplicate ``(source, target)`` pairs are merged by summing their weights.
    Zero-weight edges are dropped.
    """
    src = np.asarray(sources, dtype=np.int64)
    dst = np.asarray(targets, dtype=np.int64)
    if src.shape != dst.shape:
        raise ValueError("sources and targets differ in length")
    w = np.ones(len(src)) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != src.shape:
        raise ValueError("weights and edges differ in length")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("edge weights must be finite and non-negative")
    if n is None:
        n = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
    if len(src) and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
        raise ValueError("edge endpoint outside [0, n)")
    a = _canonical(sp.coo_matrix((w, (src, dst)), shape=(n, n)))
    labels = np.arange(n) if labels is None else np.asarray(labels)
    if len(labels) != n:
        raise ValueError("need one label per vertex")
    return SparseGraph(a, labels)


def _open_text(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8")


def parse_edge_list(source: Union[str, os.PathLike, bytes, IO], *,
                    comment: str = "#") -> SparseGraph:
    """Parse a whitespace-separated ``src dst [weight]`` edge list.

    Lines starting with ``comment`` and blank lines are ignored.  Vertex labels
    must be integers; they are remapped to dense ids in ascending label order.

    Parameters
    ----------
    source : path, bytes or file object
        A path is opened and closed here; a file object is read but left open.
    comment : str
        Comment prefix.

    Raises
    ------
    GraphFormatError
        On a malformed line (with its 1-based line number) or empty input.
    """
    fh = _open_text(source)
    src, dst, wts = [], [], []
    try:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(comment):
                continue
            parts = stripped.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(f"expected 'src dst [weight]', got {stripped!r}", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise GraphFormatError(f"non-integer vertex id in {stripped!r}", lineno) from None
            w = 1.0
            if len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise GraphFormatError(f"bad weight {parts[2]!r}", lineno) from None
                if not np.isfinite(w) or w < 0:
                    raise GraphFormatError(f"negative or non-finite weight {parts[2]!r}", lineno)
            src.append(u)
            dst.append(v)
            wts.append(w)
    finally:
        if isinstance(source, (str, os.PathLike)):
            fh.close()
    if not src:
        raise GraphFormatError("edge list contains no edges")
    raw = np.concatenate([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    labels, dense = np.unique(raw, return_inverse=True)
    k = len(src)
    return from_edges(dense[:k], dense[k:], wts, n=len(labels), labels=labels)


read_edge_list = parse_edge_list


def write_edge_list(graph: SparseGraph, dest, *, header: Iterable[str] = ()) -> None:
    """Write ``graph`` in the edge-list format using its original labels.

    Unit weights are written as two columns so the output stays compatible
    with unweighted SNAP files.
    """
    g = transpose(graph) if graph.transposed else graph
    a = g.matrix
    rows = np.repeat(np.arange(g.n), np.diff(a.indptr))
    lab = g.labels
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", encoding="utf-8") if own else dest
    try:
        for line in header:
            fh.write(f"# {line}\n")
        for u, v, w in zip(lab[rows].tolist(), lab[a.indices].tolist(), a.data.tolist()):
            if w == 1.0:
                fh.write(f"{u}\t{v}\n")
            else:
                fh.write(f"{u}\t{v}\t{w!r}\n")
    finally:
        if own:
            fh.close()


def transpose(g: SparseGraph) -> SparseGraph:
    """Reverse every edge; the orientation flag flips."""
    return SparseGraph(_canonical(g.matrix.T), g.labels, not g.transposed,
                       g._label_index)


def row_sums(g: Union[SparseGraph, GraphSlice]) -> np.ndarray:
    """Total stored-row weight per vertex (out-weight for an untransposed graph)."""
    return np.asarray(g.matrix.sum(axis=1)).ravel()


def induced_subgraph(g: SparseGraph, vertices) -> GraphSlice:
    """Slice of ``g`` on a sorted, duplicate-free vertex list.

    Local ids follow the order of ``vertices``.
    """
    vs = np.asarray(vertices, dtype=np.int64).ravel()
    if len(vs):
        if np.any(np.diff(vs) <= 0):
            raise ValueError("vertices must be sorted and unique")
        if vs[0] < 0 or vs[-1] >= g.n:
            raise ValueError("vertex id outside [0, n)")
    sub = g.matrix[vs][:, vs] if len(vs) else sp.csr_matrix((0, 0))
    return GraphSlice(g, vs, _canonical(sub))

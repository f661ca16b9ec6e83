"""Strongly connected components, condensation levels and processing layout.

Components are found with an iterative Tarjan search that also records each
component's level: the length of the longest condensation path from the
component to a sink.  Sinks have level 0 and rank flows from high levels to
low ones, so processing components by descending level puts the transposed
adjacency matrix in block lower-triangular form.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from numba import njit

from .graph import SparseGraph, transpose

__all__ = [
    "InvariantError",
    "Decomposition",
    "SingleVertexGroup",
    "BlockLayout",
    "find_components",
    "assign_levels",
    "group_single_vertex_components",
    "sort_components",
    "build_layout",
    "write_decomposition_csv",
]


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


@njit(cache=True)
def _tarjan_levels(indptr, indices):
    n = len(indptr) - 1
    index = np.full(n, -1, np.int64)
    low = np.zeros(n, np.int64)
    on_stack = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    sp_ = 0
    call_v = np.empty(n, np.int64)
    call_k = np.empty(n, np.int64)
    comp_of = np.full(n, -1, np.int64)
    comp_level = np.zeros(n, np.int64)
    ncomp = 0
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        depth = 0
        call_v[0] = root
        call_k[0] = indptr[root]
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp_] = root
        sp_ += 1
        on_stack[root] = True
        while depth >= 0:
            v = call_v[depth]
            k = call_k[depth]
            if k < indptr[v + 1]:
                call_k[depth] = k + 1
                w = indices[k]
                if index[w] < 0:
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp_] = w
                    sp_ += 1
                    on_stack[w] = True
                    depth += 1
                    call_v[depth] = w
                    call_k[depth] = indptr[w]
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            # v is finished
            if low[v] == index[v]:
                top = sp_
                while True:
                    sp_ -= 1
                    w = stack[sp_]
                    on_stack[w] = False
                    comp_of[w] = ncomp
                    if w == v:
                        break
                # every successor component is complete, so the level is final
                lev = 0
                for j in range(sp_, top):
                    w = stack[j]
                    for kk in range(indptr[w], indptr[w + 1]):
                        c = comp_of[indices[kk]]
                        if c != ncomp and comp_level[c] + 1 > lev:
                            lev = comp_level[c] + 1
                comp_level[ncomp] = lev
                ncomp += 1
            depth -= 1
            if depth >= 0:
                u = call_v[depth]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp_of, comp_level[:ncomp].copy()


@dataclass(frozen=True, eq=False)
class SingleVertexGroup:
    """All 1-vertex components sharing a level."""

    level: int
    members: np.ndarray
    self_loop_weight: np.ndarray
    components: np.ndarray


@dataclass(frozen=True, eq=False)
class Decomposition:
    """SCC partition of a graph with condensation levels.

    Boundary (inter-component) edges are stored grouped by target component:
    the edges entering component ``c`` are
    ``boundary_src[boundary_ptr[c]:boundary_ptr[c + 1]]`` and friends.
    """

    comp_of: np.ndarray
    levels: np.ndarray
    member_ptr: np.ndarray
    members: np.ndarray
    boundary_ptr: np.ndarray
    boundary_src: np.ndarray
    boundary_dst: np.ndarray
    boundary_weight: np.ndarray
    level_index: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return len(self.levels)

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.member_ptr)

    @property
    def max_level(self) -> int:
        return int(self.levels.max()) if len(self.levels) else 0

    @property
    def single_vertex(self) -> np.ndarray:
        return self.sizes == 1

    def vertices(self, c: int) -> np.ndarray:
        return self.members[self.member_ptr[c]:self.member_ptr[c + 1]]

    def incoming_boundary(self, c: int):
        s, e = self.boundary_ptr[c], self.boundary_ptr[c + 1]
        return self.boundary_src[s:e], self.boundary_dst[s:e], self.boundary_weight[s:e]

    @property
    def condensation_edges(self) -> list:
        """``(source component, target component, edges)`` for every linked pair.

        ``edges`` is an ``(k, 3)`` array of ``(u, v, weight)`` rows.
        """
        src_c = self.comp_of[self.boundary_src]
        dst_c = self.comp_of[self.boundary_dst]
        out = []
        if len(src_c) == 0:
            return out
        key = np.stack([dst_c, src_c])
        change = np.flatnonzero(np.any(key[:, 1:] != key[:, :-1], axis=0)) + 1
        starts = np.concatenate([[0], change])
        ends = np.concatenate([change, [len(src_c)]])
        for s, e in zip(starts, ends):
            edges = np.column_stack([self.boundary_src[s:e], self.boundary_dst[s:e],
                                     self.boundary_weight[s:e]])
            out.append((int(src_c[s]), int(dst_c[s]), edges))
        return out


def find_components(g: SparseGraph) -> Decomposition:
    """Strongly connected components of ``g`` with levels and sorted level index.

    The search is iterative, so recursion depth does not grow with ``n``.
    """
    if g.transposed:
        g = transpose(g)
    if g.n == 0:
        raise ValueError("graph has no vertices")
    a = g.matrix
    comp_of, levels = _tarjan_levels(a.indptr.astype(np.int64), a.indices.astype(np.int64))
    ncomp = len(levels)
    counts = np.bincount(comp_of, minlength=ncomp)
    member_ptr = np.concatenate([[0], np.cumsum(counts)])
    members = np.argsort(comp_of, kind="stable")

    rows = np.repeat(np.arange(g.n), np.diff(a.indptr))
    cross = comp_of[rows] != comp_of[a.indices]
    b_src, b_dst, b_w = rows[cross], a.indices[cross].astype(np.int64), a.data[cross]
    order = np.lexsort((b_dst, b_src, comp_of[b_src], comp_of[b_dst]))
    b_src, b_dst, b_w = b_src[order], b_dst[order], b_w[order]
    b_ptr = np.concatenate([[0], np.cumsum(np.bincount(comp_of[b_dst], minlength=ncomp))])

    d = Decomposition(comp_of, levels, member_ptr, members, b_ptr, b_src, b_dst, b_w)
    return sort_components(d)


def assign_levels(decomp: Decomposition) -> Decomposition:
    """Recompute levels from the condensation edges alone.

    ``level(C) = 0`` for sinks and ``1 + max(level(successor))`` otherwise.
    Raises ``InvariantError`` if the condensation contains a cycle.
    """
    c = decomp.n_components
    src_c = decomp.comp_of[decomp.boundary_src]
    dst_c = decomp.comp_of[decomp.boundary_dst]
    if np.any(src_c == dst_c):
        raise InvariantError("boundary edge inside a component")
    succ = sp.csr_matrix((np.ones(len(src_c)), (src_c, dst_c)), shape=(c, c))
    succ.sum_duplicates()
    out_deg = np.diff(succ.indptr)
    pred = succ.T.tocsr()
    levels = np.zeros(c, np.int64)
    remaining = out_deg.copy()
    frontier = list(np.flatnonzero(remaining == 0))
    done = 0
    while frontier:
        nxt = []
        for t in frontier:
            done += 1
            for s in pred.indices[pred.indptr[t]:pred.indptr[t + 1]]:
                levels[s] = max(levels[s], levels[t] + 1)
                remaining[s] -= 1
                if remaining[s] == 0:
                    nxt.append(s)
        frontier = nxt
    if done != c:
        raise InvariantError("condensation graph has a cycle")
    return sort_components(replace(decomp, levels=levels))


def group_single_vertex_components(decomp: Decomposition,
                                   g: SparseGraph) -> list[SingleVertexGroup]:
    """One group per level holding that level's 1-vertex components.

    Groups are returned in processing order (highest level first).
    """
    single = np.flatnonzero(decomp.single_vertex)
    if len(single) == 0:
        return []
    loops = g.matrix.diagonal()
    groups = []
    lev = decomp.levels[single]
    for level in sorted(set(lev.tolist()), reverse=True):
        comps = single[lev == level]
        verts = decomp.members[decomp.member_ptr[comps]]
        order = np.argsort(verts)
        groups.append(SingleVertexGroup(int(level), verts[order], loops[verts[order]],
                                        comps[order]))
    return groups


def sort_components(decomp: Decomposition) -> Decomposition:
    """Fill ``level_index``: per level, component ids by size descending.

    Ties in size go to the smaller component id.
    """
    sizes = decomp.sizes
    comps = np.arange(decomp.n_components)
    order = np.lexsort((comps, -sizes, -decomp.levels))
    index: dict[int, list[int]] = {}
    for c in order.tolist():
        index.setdefault(int(decomp.levels[c]), []).append(c)
    return replace(decomp, level_index=index)


@dataclass(frozen=True, eq=False)
class BlockLayout:
    """Transposed adjacency permuted into processing order.

    Vertices are renumbered so that every component occupies a contiguous
    range ``[start[c], end[c])``, components ordered by level (descending),
    then size (descending).  In row ``r`` of the permuted transpose, entries
    ``indptr[r]:diag_ptr[r]`` are boundary edges from earlier components and
    ``diag_ptr[r]:indptr[r+1]`` lie in the row's own diagonal block.
    """

    decomp: Decomposition
    perm: np.ndarray
    inverse: np.ndarray
    order: np.ndarray
    start: np.ndarray
    end: np.ndarray
    indptr: np.ndarray
    diag_ptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    block_bound: np.ndarray
    self_loop: np.ndarray

    @property
    def n(self) -> int:
        return len(self.perm)

    def block(self, c: int) -> sp.csr_matrix:
        """Diagonal block of component ``c`` (transposed orientation, local ids)."""
        s, e = int(self.start[c]), int(self.end[c])
        rows, cols, vals = [], [], []
        for r in range(s, e):
            k0, k1 = self.diag_ptr[r], self.indptr[r + 1]
            rows.extend([r - s] * (k1 - k0))
            cols.extend((self.indices[k0:k1] - s).tolist())
            vals.extend(self.data[k0:k1].tolist())
        return sp.csr_matrix((vals, (rows, cols)), shape=(e - s, e - s))


def build_layout(g: SparseGraph, decomp: Decomposition) -> BlockLayout:
    """Permute the transposed adjacency of ``g`` into processing order."""
    if g.transposed:
        g = transpose(g)
    order = np.array([c for level in sorted(decomp.level_index, reverse=True)
                      for c in decomp.level_index[level]], dtype=np.int64)
    sizes = decomp.sizes[order]
    start = np.empty(decomp.n_components, np.int64)
    start[order] = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    end = start + decomp.sizes
    perm = np.concatenate([decomp.vertices(c) for c in order.tolist()])
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(len(perm))

    at = g.matrix.T.tocsr()[perm][:, perm].tocsr()
    at.sort_indices()
    n = len(perm)
    indptr = at.indptr.astype(np.int64)
    indices = at.indices.astype(np.int64)
    row_comp = decomp.comp_of[perm]
    entry_row = np.repeat(np.arange(n), np.diff(indptr))
    entry_start = start[row_comp][entry_row]
    if np.any(indices >= end[row_comp][entry_row]):
        raise InvariantError("processing order is not block lower-triangular")
    boundary = indices < entry_start
    diag_ptr = indptr[:-1] + np.bincount(entry_row[boundary], minlength=n)

    diag_sum = np.bincount(entry_row[~boundary], weights=at.data[~boundary], minlength=n)
    block_bound = np.zeros(decomp.n_components)
    np.maximum.at(block_bound, row_comp, diag_sum)
    self_loop = g.matrix.diagonal()[perm]
    return BlockLayout(decomp, perm, inverse, order, start, end, indptr, diag_ptr,
                       indices, at.data.astype(np.float64), block_bound, self_loop)


def write_decomposition_csv(decomp: Decomposition, dest, labels=None) -> None:
    """Debug dump: one ``vertex,component,level`` row per vertex."""
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertex", "component", "level"])
        for v, c in enumerate(decomp.comp_of.tolist()):
            w.writerow([v if labels is None else labels[v], c, int(decomp.levels[c])])
    finally:
        if own:
            fh.close()

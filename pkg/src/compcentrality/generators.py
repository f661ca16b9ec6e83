"""Seeded synthetic graphs for benchmarks and tests.

* ``dag_of_sccs`` -- small random strongly connected components linked into a
  DAG, optionally with one component made strictly dominant.
* ``giant_component`` -- a web-like graph: one giant SCC, with small
  components upstream of it, downstream of it and on tendrils.
* ``isolated_blocks`` -- weakly disconnected blocks whose components all have
  dominant eigenvalue 2 (cycles with a self-loop on every vertex).
"""

from __future__ import annotations

import numpy as np

from .graph import SparseGraph, from_edges

__all__ = ["dag_of_sccs", "giant_component", "isolated_blocks", "GENERATORS"]


def _strong_block(rng, verts, p_chord, p_loop):
    """Edges of a random aperiodic strongly connected graph on ``verts``.

    A random Hamiltonian cycle, one self-loop, then chords and further
    self-loops with the given probabilities.
    """
    k = len(verts)
    src, dst = [], []
    if k == 1:
        if rng.random() < p_loop:
            src.append(verts[0])
            dst.append(verts[0])
        return src, dst
    cyc = rng.permutation(verts)
    # one guaranteed self-loop keeps the block aperiodic
    src.append(cyc[0])
    dst.append(cyc[0])
    src.extend(cyc)
    dst.extend(np.roll(cyc, -1))
    for i in range(k):
        for j in range(k):
            if i == j:
                if verts[i] != cyc[0] and rng.random() < p_loop:
                    src.append(verts[i])
                    dst.append(verts[i])
            elif rng.random() < p_chord:
                src.append(verts[i])
                dst.append(verts[j])
    return src, dst


def _perron(src, dst, w, verts):
    if not len(src):
        return 0.0
    index = {v: i for i, v in enumerate(verts)}
    a = np.zeros((len(verts), len(verts)))
    for u, v, x in zip(src, dst, w):
        a[index[u], index[v]] += x
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def dag_of_sccs(components: int = 10, size: int = 5, seed: int = 0, *,
                min_size: int | None = None, p_chord: float = 0.3, p_loop: float = 0.5,
                p_link: float = 0.3, dominant: bool = True,
                dominant_gap: float = 1.25) -> SparseGraph:
    """Random DAG of strongly connected components.

    Component sizes are drawn uniformly from ``[min_size, size]`` (all equal to
    ``size`` by default).  Components are placed in a random topological order;
    each consecutive pair is linked with probability 1/2 and any other forward
    pair with probability ``p_link``.  With ``dominant`` set, the intra-edge
    weights of one random multi-vertex component are scaled so its dominant
    eigenvalue exceeds every other component's by the factor ``dominant_gap``.
    """
    if components < 1 or size < 1:
        raise ValueError("need at least one component of size >= 1")
    min_size = size if min_size is None else min_size
    if not 1 <= min_size <= size:
        raise ValueError("min_size must lie in [1, size]")
    rng = np.random.default_rng(seed)
    sizes = rng.integers(min_size, size + 1, components)
    if dominant and sizes.max() == 1:
        sizes[rng.integers(components)] = 2
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    blocks = [np.arange(offsets[i], offsets[i + 1]) for i in range(components)]

    intra = []
    for verts in blocks:
        s, d = _strong_block(rng, verts, p_chord, p_loop)
        intra.append((np.array(s, dtype=np.int64), np.array(d, dtype=np.int64)))
    weights = [np.ones(len(s)) for s, _ in intra]

    if dominant:
        lams = [_perron(s, d, w, verts) for (s, d), w, verts in zip(intra, weights, blocks)]
        candidates = [i for i in range(components) if sizes[i] > 1]
        top = int(rng.choice(candidates))
        others = max([l for i, l in enumerate(lams) if i != top], default=0.0)
        target = dominant_gap * max(others, 1.0)
        if lams[top] < target:
            weights[top] = weights[top] * (target / lams[top])

    src = [s for s, _ in intra]
    dst = [d for _, d in intra]
    wts = list(weights)
    order = rng.permutation(components)
    for a in range(components):
        for b in range(a + 1, components):
            p = 0.5 if b == a + 1 else p_link
            if rng.random() < p:
                u = rng.choice(blocks[order[a]])
                v = rng.choice(blocks[order[b]])
                src.append(np.array([u]))
                dst.append(np.array([v]))
                wts.append(np.array([float(rng.integers(1, 3))]))
    return from_edges(np.concatenate(src), np.concatenate(dst), np.concatenate(wts),
                      n=int(offsets[-1]))


def giant_component(n: int = 10000, giant_fraction: float = 0.5, seed: int = 0, *,
                    avg_degree: float = 4.0, single_fraction: float = 0.85,
                    max_small: int = 6, small_chord: float = 0.25) -> SparseGraph:
    """Web-like graph with one giant strongly connected component.

    The giant SCC holds ``round(giant_fraction * n)`` vertices: a random cycle
    plus random chords up to ``avg_degree`` out-edges per vertex.  The other
    vertices form small components (1-vertex with probability
    ``single_fraction``, otherwise 2..``max_small`` vertex SCCs with chord
    probability ``small_chord``, which keeps their eigenvalues well below the
    giant's).  Small
    components sit upstream of the giant (40%), downstream (40%) or on tendrils
    (20%), and inter-component edges only run forward in one random
    topological order, so the giant lands in the middle of the level structure.
    """
    if not 0 < giant_fraction <= 1:
        raise ValueError("giant_fraction must lie in (0, 1]")
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.default_rng(seed)
    g_size = max(2, int(round(giant_fraction * n)))
    perm = rng.permutation(n)
    giant = perm[:g_size]

    src = [giant, rng.choice(giant, int(g_size * (avg_degree - 1)))]
    dst = [np.roll(giant, -1), rng.choice(giant, int(g_size * (avg_degree - 1)))]

    smalls = []
    pos = g_size
    while pos < n:
        k = 1 if rng.random() < single_fraction else int(rng.integers(2, max_small + 1))
        k = min(k, n - pos)
        verts = perm[pos:pos + k]
        pos += k
        s, d = _strong_block(rng, verts, small_chord, 0.3 if k > 1 else 0.2)
        src.append(np.array(s, dtype=np.int64))
        dst.append(np.array(d, dtype=np.int64))
        smalls.append(verts)

    roles = rng.random(len(smalls))
    upstream = [b for b, r in zip(smalls, roles) if r < 0.4]
    downstream = [b for b, r in zip(smalls, roles) if 0.4 <= r < 0.8]
    tendrils = [b for b, r in zip(smalls, roles) if r >= 0.8]

    def link(a, b, count):
        src.append(rng.choice(a, count))
        dst.append(rng.choice(b, count))

    # upstream components feed later upstream components or the giant
    for i, b in enumerate(upstream):
        for _ in range(int(rng.integers(1, 4))):
            later = upstream[i + 1:]
            if later and rng.random() < 0.5:
                link(b, later[int(rng.integers(len(later)))], 1)
            else:
                link(b, giant, 1)
    # downstream components are fed by the giant or earlier downstream ones
    for i, b in enumerate(downstream):
        for _ in range(int(rng.integers(1, 4))):
            earlier = downstream[:i]
            if earlier and rng.random() < 0.5:
                link(earlier[int(rng.integers(len(earlier)))], b, 1)
            else:
                link(giant, b, 1)
    for b in tendrils:
        if upstream and rng.random() < 0.5:
            link(upstream[int(rng.integers(len(upstream)))], b, 1)
        elif downstream:
            link(b, downstream[int(rng.integers(len(downstream)))], 1)
    return from_edges(np.concatenate(src), np.concatenate(dst), n=n)


def isolated_blocks(blocks: int = 2, block_size: int = 6, seed: int = 0,
                    *, chain: int = 2) -> SparseGraph:
    """Weakly disconnected blocks whose components all have eigenvalue 2.

    Each block is a chain of ``chain`` components linked top to bottom; every
    component is a directed cycle with a self-loop on each vertex (a lone
    vertex gets a self-loop of weight 2).
    """
    if blocks < 1 or block_size < chain or chain < 1:
        raise ValueError("need blocks >= 1 and block_size >= chain >= 1")
    rng = np.random.default_rng(seed)
    src, dst = [], []
    base = 0
    for _ in range(blocks):
        cuts = np.sort(rng.choice(np.arange(1, block_size), chain - 1, replace=False))
        parts = np.split(np.arange(base, base + block_size), cuts)
        for verts in parts:
            src.extend(verts.tolist())
            dst.extend(verts.tolist())
            # the cycle edge of a 1-vertex part doubles its self-loop
            src.extend(verts.tolist())
            dst.extend(np.roll(verts, -1).tolist())
        for upper, lower in zip(parts[:-1], parts[1:]):
            for _ in range(int(rng.integers(1, 3))):
                src.append(int(rng.choice(upper)))
                dst.append(int(rng.choice(lower)))
        base += block_size
    return from_edges(src, dst, n=base)


GENERATORS = {
    "dag-of-sccs": dag_of_sccs,
    "giant-component": giant_component,
    "isolated-blocks": isolated_blocks,
}

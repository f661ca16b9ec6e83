import numpy as np
import pytest
from scipy.linalg import block_diag

from compcentrality import from_edges

# the two example blocks: a 7-vertex chain of three equal-eigenvalue
# components and a 5-vertex source block feeding a 2-vertex sink
A1 = np.array([
    [1, 1, 1, 1, 1, 1, 0],
    [1, 1, 0, 1, 1, 1, 1],
    [0, 0, 1, 1, 0, 0, 0],
    [0, 0, 0, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 1, 1],
], dtype=float)

A2 = np.array([
    [1, 1, 0, 1, 1],
    [0, 1, 1, 1, 0],
    [1, 0, 1, 1, 1],
    [0, 0, 0, 1, 1],
    [0, 0, 0, 1, 1],
], dtype=float)

X1 = np.array([0, 0, 0.2083, 0.2083, 0.2083, 0.1875, 0.1875])
X2 = np.array([0, 0, 0, 0.49996, 0.49996])


def dense_graph(a):
    a = np.asarray(a, dtype=float)
    r, c = np.nonzero(a)
    return from_edges(r, c, a[r, c], n=len(a))


def reachability(a):
    """Boolean transitive closure (reflexive) by repeated squaring."""
    n = len(a)
    r = (np.asarray(a) != 0) | np.eye(n, dtype=bool)
    while True:
        nxt = (r.astype(int) @ r.astype(int)) > 0
        if (nxt == r).all():
            return r
        r = nxt


def brute_scc(a):
    """Mutual-reachability classes as a canonical partition (sorted tuples)."""
    r = reachability(a)
    mutual = r & r.T
    return sorted({tuple(np.flatnonzero(mutual[i]).tolist()) for i in range(len(a))})


def brute_levels(a):
    """Longest path to a sink in the condensation, keyed by vertex."""
    classes = brute_scc(a)
    cls_of = {v: i for i, c in enumerate(classes) for v in c}
    succ = {i: set() for i in range(len(classes))}
    for u, v in zip(*np.nonzero(np.asarray(a))):
        if cls_of[u] != cls_of[v]:
            succ[cls_of[u]].add(cls_of[v])
    memo = {}

    def depth(c):
        if c not in memo:
            memo[c] = 1 + max((depth(s) for s in succ[c]), default=-1)
        return memo[c]

    return {v: depth(cls_of[v]) for v in range(len(a))}


def perron_vector(a):
    """L1-normalized dominant eigenvector of ``a.T`` via a dense eigensolver."""
    vals, vecs = np.linalg.eig(np.asarray(a, dtype=float).T)
    k = np.argmax(vals.real)
    v = np.abs(vecs[:, k].real)
    return vals[k].real, v / v.sum()


@pytest.fixture
def fig1():
    return dense_graph(block_diag(A1, A2))

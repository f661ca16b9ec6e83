import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compcentrality.graph import (GraphFormatError, from_edges, induced_subgraph,
                                  parse_edge_list, row_sums, transpose, write_edge_list)

from conftest import A1, A2, dense_graph


def test_parse_two_edge_chain():
    g = parse_edge_list(b"1 2\n2 3\n")
    assert (g.n, g.m) == (3, 2)
    assert g.labels.tolist() == [1, 2, 3]
    assert set(g.matrix.data) == {1.0}


def test_parse_merges_duplicates():
    g = parse_edge_list(b"# comment\n0 1 2.5\n0 1 0.5\n")
    assert (g.n, g.m) == (2, 1)
    assert g.edge_set() == {(0, 1): 3.0}


def test_parse_remaps_sparse_labels():
    g = parse_edge_list(io.StringIO("100 7\n7 100\n\n# tail\n"))
    assert g.labels.tolist() == [7, 100]
    assert g.edge_set() == {(1, 0): 1.0, (0, 1): 1.0}
    assert g.dense_id(100) == 1


@pytest.mark.parametrize("text, line", [
    ("0 1\nx 2\n", 2),
    ("0 1\n1 2 -3\n", 2),
    ("# c\n0\n", 2),
    ("0 1 2 3\n", 1),
    ("0 1 abc\n", 1),
])
def test_parse_errors_carry_line(text, line):
    with pytest.raises(GraphFormatError) as err:
        parse_edge_list(text.encode())
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


def test_parse_empty_input():
    with pytest.raises(GraphFormatError):
        parse_edge_list(b"# only a comment\n\n")


def test_parse_path(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("0 1\n1 0\n")
    assert parse_edge_list(p).m == 2


def test_from_edges_rejects_negative():
    with pytest.raises(ValueError):
        from_edges([0], [1], [-1.0])


def test_transpose_single_edge():
    g = from_edges([0], [1])
    t = transpose(g)
    assert t.edge_set() == {(1, 0): 1.0}
    assert t.transposed and not g.transposed


def test_transpose_involution_a2():
    g = dense_graph(A2)
    assert transpose(transpose(g)).edge_set() == g.edge_set()
    np.testing.assert_array_equal(transpose(g).matrix.toarray(), A2.T)


def test_row_sums():
    g = from_edges([0, 0, 1], [1, 2, 2], [1.0, 2.0, 0.5], n=4)
    np.testing.assert_allclose(row_sums(g), [3.0, 0.5, 0.0, 0.0])
    assert row_sums(dense_graph(A1))[0] == 6


def test_row_sum_bounds_perron_root():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 11))
        a = (rng.random((n, n)) < 0.4) * rng.random((n, n)) * 3
        lam = max(abs(np.linalg.eigvals(a))) if n else 0.0
        if a.any():
            assert row_sums(dense_graph(a)).max() >= lam - 1e-9


def test_induced_subgraph_a1_cycle_block():
    sl = induced_subgraph(dense_graph(A1), [2, 3, 4])
    np.testing.assert_array_equal(sl.matrix.toarray(), [[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    assert sl.to_global(0) == 2
    assert sl.to_local([4]).tolist() == [2]


def test_induced_subgraph_full_and_empty():
    g = dense_graph(A2)
    full = induced_subgraph(g, range(5))
    np.testing.assert_array_equal(full.matrix.toarray(), A2)
    empty = induced_subgraph(g, [])
    assert (empty.n, empty.m) == (0, 0)


@pytest.mark.parametrize("verts", [[0, 0], [2, 1], [0, 9], [-1, 0]])
def test_induced_subgraph_rejects(verts):
    with pytest.raises(ValueError):
        induced_subgraph(dense_graph(A2), verts)


edges = st.lists(
    st.tuples(st.integers(0, 40), st.integers(0, 40),
              st.sampled_from([1.0, 0.5, 2.0, 3.25])),
    min_size=1, max_size=60)


@settings(max_examples=60, deadline=None)
@given(edges)
def test_roundtrip_is_idempotent(es):
    text = "".join(f"{u} {v} {w}\n" for u, v, w in es)
    g = parse_edge_list(text.encode())
    buf = io.StringIO()
    write_edge_list(g, buf)
    g2 = parse_edge_list(buf.getvalue().encode())
    assert g2.labels.tolist() == g.labels.tolist()
    assert g2.edge_set() == g.edge_set()


@settings(max_examples=60, deadline=None)
@given(edges)
def test_transpose_preserves_weights_and_swaps_degrees(es):
    u, v, w = map(np.array, zip(*es))
    g = from_edges(u, v, w, n=41)
    t = transpose(g)
    assert sorted(t.matrix.data) == sorted(g.matrix.data)
    out_deg = np.diff(g.matrix.indptr)
    in_deg = np.bincount(g.matrix.indices, minlength=g.n)
    np.testing.assert_array_equal(np.diff(t.matrix.indptr), in_deg)
    np.testing.assert_array_equal(np.bincount(t.matrix.indices, minlength=g.n), out_deg)
    assert transpose(t).edge_set() == g.edge_set()

from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse.csgraph as csg

from vicsek.decim import Params
from vicsek.errors import CapacityExceeded, EmptyInterior
from vicsek.graph import (
    apply_laplacian,
    apply_map,
    build_graph,
    corner,
    eigen_residual,
    energy,
    letters,
    max_level,
    operator_matrix,
    opposite,
)


def _fraction_vertices(d, n, m):
    """V_m from the contractions written with exact rationals."""
    r = Fraction(1, 2 * n - 1)
    q = [tuple(Fraction((i >> l) & 1) for l in range(d)) for i in range(2**d)]
    q0 = tuple(Fraction(1, 2) for _ in range(d))

    def contraction(i, j):
        w = (2 * n - 2) * r
        shift = tuple(w * (Fraction(n - j, n - 1) * a + Fraction(j - 1, n - 1) * b) for a, b in zip(q[i], q0))
        return lambda x: tuple(r * a + s for a, s in zip(x, shift))

    maps = [contraction(i, j) for i in range(2**d) for j in range(1, n + 1)]
    pts = set(q)
    for _ in range(m):
        pts = {f(x) for f in maps for x in pts}
    return pts


@pytest.mark.parametrize("d,n,m", [(2, 2, 1), (2, 2, 2), (2, 3, 2), (3, 2, 1), (3, 3, 1)])
def test_vertices_match_rational_construction(d, n, m):
    g = build_graph(Params(d, n), m)
    got = {tuple(Fraction(int(c), g.scale) for c in row) for row in g.coords}
    assert got == _fraction_vertices(d, n, m)


def test_corner_bits():
    p = Params(2, 2)
    assert corner(p, 1).tolist() == [0, 0]
    assert corner(p, 2).tolist() == [1, 0]
    assert corner(p, 4).tolist() == [1, 1]
    assert opposite(p, 1) == 4 and opposite(p, 2) == 3
    with pytest.raises(ValueError):
        corner(p, 5)


def test_apply_map():
    p = Params(2, 2)
    for i in range(1, 5):
        q = 2 * corner(p, i)
        # F_{i,1} fixes q_i
        assert apply_map(p, (i, 1), q, 0).tolist() == (3 * q).tolist()
    q0 = np.array([1, 1])
    assert apply_map(p, 0, q0, 0).tolist() == [3, 3]
    # corners of V_0 land on lattice points at the next scale
    img = apply_map(p, (1, 1), np.array([2, 2]), 0)
    assert img.tolist() == [2, 2]
    assert len(letters(p)) == p.cell_count
    with pytest.raises(ValueError):
        apply_map(p, (5, 1), q0, 0)


def test_small_graphs():
    g0 = build_graph(Params(2, 2), 0)
    assert (g0.num_vertices, g0.num_edges) == (4, 6)
    assert set(g0.degree.tolist()) == {3}
    g1 = build_graph(Params(2, 2), 1)
    assert (g1.num_vertices, g1.num_edges) == (16, 30)
    assert build_graph(Params(3, 2), 1).num_vertices == 64


@pytest.mark.parametrize("d,n,m", [(d, n, m) for d in (2, 3) for n in (2, 3, 4) for m in range(4)])
def test_counts_degrees_connectivity(d, n, m):
    p = Params(d, n)
    g = build_graph(p, m)
    assert g.num_vertices == p.vertex_count(m)
    assert g.num_edges == p.edge_count(m)
    assert set(g.degree.tolist()) <= {p.N, 2 * p.N}
    assert g.degree.sum() == 2 * g.num_edges
    assert int(g.is_boundary.sum()) == 2**d
    if m >= 1:
        assert set(g.degree[g.boundary].tolist()) == {p.N}
    ncomp, _ = csg.connected_components(g.adjacency, directed=False)
    assert ncomp == 1


def test_ordering_and_locate():
    g = build_graph(Params(2, 3), 2)
    order = np.lexsort(g.coords.T[::-1])
    assert np.array_equal(order, np.arange(g.num_vertices))
    assert g.locate(g.coords[[5, 0, 7]]).tolist() == [5, 0, 7]
    with pytest.raises(KeyError):
        g.locate([[1, 0]])
    assert g.boundary.tolist() == g.locate([[0, 0], [50, 0], [0, 50], [50, 50]]).tolist()


def test_cell_words_and_nesting():
    p = Params(2, 2)
    g1, g2 = build_graph(p, 1), build_graph(p, 2)
    assert g2.cell_word(0) == ((1, 1), (1, 1))
    assert g2.cell_word(g2.cells.shape[0] - 1) == (0, 0)
    # rescaled V_1 sits inside V_2
    g2.locate(3 * g1.coords)
    # cell c at level 2 lies inside its parent cell c // L at level 1
    lo = 3 * g1.coords[g1.cells[:, 0]]
    for c in range(g2.cells.shape[0]):
        pts = g2.coords[g2.cells[c]]
        base = lo[c // p.cell_count]
        assert np.all(pts >= base) and np.all(pts <= base + 6)


def test_laplacian_examples():
    g0 = build_graph(Params(2, 2), 0)
    assert np.allclose(apply_laplacian(g0, np.ones(4)), 0)
    f = np.array([3.0, -1, -1, -1])
    assert np.allclose(apply_laplacian(g0, f), 4 / 3 * f)
    with pytest.raises(ValueError):
        apply_laplacian(g0, np.ones(3))


def test_energy_examples():
    g0 = build_graph(Params(2, 2), 0)
    assert energy(g0, np.ones(4)) == 0
    assert energy(g0, np.eye(4)[0]) == 3
    g1 = build_graph(Params(2, 2), 1)
    junction = int(np.flatnonzero(g1.degree == 6)[0])
    assert energy(g1, np.eye(16)[junction]) == 18
    rng = np.random.default_rng(0)
    f = rng.normal(size=16)
    brute = sum((f[a] - f[b]) ** 2 for a, b in g1.edges.tolist())
    assert energy(g1, f) == pytest.approx(3 * brute, rel=1e-14)


def test_operator_matrix():
    g0 = build_graph(Params(2, 2), 0)
    op = operator_matrix(g0)
    expected = np.full((4, 4), -1 / 3)
    np.fill_diagonal(expected, 1)
    assert np.allclose(op.matrix, expected)
    g1 = build_graph(Params(2, 2), 1)
    d = operator_matrix(g1, "dirichlet")
    assert d.matrix.shape == (12, 12)
    assert np.trace(d.matrix) == 12
    assert np.array_equal(d.matrix, d.matrix.T)
    assert not g1.is_boundary[d.index].any()
    with pytest.raises(EmptyInterior):
        operator_matrix(g0, "dirichlet")
    with pytest.raises(ValueError):
        operator_matrix(g0, "robin")


def test_operator_matches_random_walk_laplacian():
    g = build_graph(Params(3, 2), 1)
    op = operator_matrix(g)
    f = np.random.default_rng(3).normal(size=g.num_vertices)
    s = np.sqrt(g.degree)
    # D^{1/2} (I - D^{-1} A) D^{-1/2}
    assert np.allclose(op.matrix @ (s * f), s * apply_laplacian(g, f))


def test_eigen_residual():
    g0 = build_graph(Params(2, 2), 0)
    assert eigen_residual(g0, [3, -1, -1, -1], 4 / 3) == pytest.approx(0, abs=1e-15)
    assert eigen_residual(g0, [1, 0, 0, 0], 0) == pytest.approx(1)


def test_capacity(monkeypatch):
    p = Params(2, 2)
    assert max_level(p) >= 7
    monkeypatch.setenv("VICSEK_MAX_LEVEL", "2")
    assert max_level(p) == 2
    with pytest.raises(CapacityExceeded):
        build_graph(p, 3)
    with pytest.raises(ValueError):
        build_graph(p, -1)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vicsek.cheb import eval_T
from vicsek.decim import Params, eval_R, forbidden_set, inverse_branches, is_forbidden
from vicsek.eigmap import (
    arm_closed_form,
    arm_propagate,
    cell_trace,
    extend_eigenfunction,
    local_min_singular_value,
    local_system,
    restrict,
    restrict_check,
    side_values,
)
from vicsek.eigoracle import cluster_multiplicities, dense_spectrum
from vicsek.errors import (
    ForbiddenEigenvalue,
    NearForbidden,
    NotAnEigenfunction,
    TopValueExcluded,
)
from vicsek.graph import build_graph, eigen_residual, operator_matrix


def _eigenpairs(graph, mode="neumann"):
    op = operator_matrix(graph, mode)
    ds = dense_spectrum(op.matrix, vectors=True)
    for value, _ in cluster_multiplicities(ds.values, check_gap=False):
        k = int(np.argmin(np.abs(ds.values - value)))
        f = np.zeros(graph.num_vertices)
        f[op.index] = ds.vectors[:, k] / np.sqrt(graph.degree[op.index])
        yield value, f


def _same_ray(a, b):
    a = a / a[np.argmax(np.abs(a))]
    b = b / b[np.argmax(np.abs(b))]
    return np.max(np.abs(a - b))


def test_arm_anchors():
    assert arm_propagate(0.3, 1.5, 2.5, 1) == 1.5
    assert arm_propagate(0.3, 1.5, 2.5, 2) == 2.5
    with pytest.raises(ValueError):
        arm_propagate(0.3, 1.0, 1.0, 0)


@settings(max_examples=300)
@given(
    st.floats(-2, 2),
    st.floats(-10, 10),
    st.floats(-10, 10),
    st.integers(1, 12),
)
def test_arm_closed_form_matches_recurrence(t, j1, j2, j):
    assert arm_closed_form(t, j1, j2, j) == pytest.approx(arm_propagate(t, j1, j2, j), abs=1e-12 * 50**j)


def test_arm_nonjunction_normalization():
    t, j1 = 0.37, 1.3
    for j in range(1, 9):
        assert arm_propagate(t, j1, t * j1, j) == pytest.approx(eval_T(j - 1, t) * j1, abs=1e-13)


def test_side_values():
    assert side_values(0.0, 1.0, 1.0) == 2.0
    with pytest.raises(TopValueExcluded):
        side_values(-1.0, 1.0, 2.0)


@given(st.floats(-0.9, 3), st.floats(-5, 5), st.floats(-5, 5))
def test_side_values_solve_side_equation(t, jl, jr):
    # λL = L - (J + J' + (N - 2)L) / N at every side vertex
    for n_corner in (4, 8):
        N = n_corner - 1
        lam = (1 - t) / N
        L = side_values(t, jl, jr)
        assert lam * L == pytest.approx(L - (jl + jr + (N - 2) * L) / N, abs=1e-9 * (1 + abs(L)))


def test_extend_k4_example():
    p = Params(2, 2)
    g0, g1 = build_graph(p, 0), build_graph(p, 1)
    f0 = np.array([3.0, -1, -1, -1])
    ef = extend_eigenfunction(g0, g1, f0, 1 / 6)
    assert ef.eigenvalue == 1 / 6
    assert eigen_residual(g1, ef.values, 1 / 6) <= 1e-10
    assert np.array_equal(restrict(g0, g1, ef.values), f0)
    # compare with a dense eigenvector for 1/6 that restricts to the same data
    op = operator_matrix(g1)
    ds = dense_spectrum(op.matrix, vectors=True)
    basis = ds.vectors[:, np.abs(ds.values - 1 / 6) < 1e-8] / np.sqrt(g1.degree)[:, None]
    emb = g1.locate(3 * g0.coords)
    coef = np.linalg.lstsq(basis[emb], f0, rcond=None)[0]
    assert _same_ray(basis @ coef, ef.values) <= 1e-10


def test_extend_constant():
    p = Params(2, 3)
    g0, g1 = build_graph(p, 1), build_graph(p, 2)
    ef = extend_eigenfunction(g0, g1, np.ones(g0.num_vertices), 0.0)
    assert np.allclose(ef.values, 1.0)


def test_extend_errors():
    p = Params(2, 2)
    g0, g1 = build_graph(p, 0), build_graph(p, 1)
    with pytest.raises(ForbiddenEigenvalue):
        extend_eigenfunction(g0, g1, np.ones(4), 0.5)
    with pytest.raises(ForbiddenEigenvalue):
        extend_eigenfunction(g0, g1, np.ones(4), 4 / 3)
    with pytest.raises(NearForbidden):
        extend_eigenfunction(g0, g1, np.ones(4), 0.5 + 1e-8)
    with pytest.raises(NotAnEigenfunction):
        extend_eigenfunction(g0, g1, np.array([1.0, 0, 0, 0]), 1 / 6)
    with pytest.raises(ValueError):
        extend_eigenfunction(g0, g1, np.ones(3), 0.0)
    with pytest.raises(ValueError):
        extend_eigenfunction(g0, build_graph(p, 2), np.ones(4), 0.0)


def test_restrict_examples():
    p = Params(2, 2)
    g0, g1 = build_graph(p, 0), build_graph(p, 1)
    rep = restrict_check(g0, g1, np.ones(16), 0.0)
    assert rep.passed and rep.residual == 0 and rep.eigenvalue == 0
    with pytest.raises(TopValueExcluded):
        restrict_check(g0, g1, np.ones(16), 4 / 3)
    with pytest.raises(NotAnEigenfunction):
        restrict_check(g0, g1, np.arange(16.0), 1 / 6)


ROUND_TRIP = [
    (d, n, m, mode)
    for d, n in [(2, 2), (2, 3), (3, 2)]
    for m in range(3)
    for mode in ("neumann", "dirichlet")
    if not (mode == "dirichlet" and m == 0)
]


@pytest.mark.parametrize("d,n,m,mode", ROUND_TRIP)
def test_round_trip(d, n, m, mode):
    p = Params(d, n)
    coarse, fine = build_graph(p, m), build_graph(p, m + 1)
    checked = 0
    for mu, f in _eigenpairs(coarse, mode):
        for lam in inverse_branches(p, min(max(mu, 0.0), float(p.top_value))):
            if is_forbidden(p, lam):
                with pytest.raises(ForbiddenEigenvalue):
                    extend_eigenfunction(coarse, fine, f, lam, mode)
                continue
            ef = extend_eigenfunction(coarse, fine, f, lam, mode)
            assert eigen_residual(fine, ef.values, lam, mode) <= 1e-8
            if mode == "dirichlet":
                assert np.all(ef.values[fine.is_boundary] == 0)
            rep = restrict_check(coarse, fine, ef.values, lam, mode)
            assert rep.passed and rep.residual <= 1e-7
            assert rep.eigenvalue == pytest.approx(mu, abs=1e-9)
            checked += 1
    assert checked > 0


@pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_local_system_degenerate_on_forbidden(d, n):
    p = Params(d, n)
    fs = forbidden_set(p)
    for lam in fs.values():
        assert local_min_singular_value(p, lam) <= 1e-8
    for lam in np.linspace(0.01, float(p.top_value) - 0.01, 150):
        if min(abs(lam - v) for v in fs.values()) > 1e-3:
            assert local_min_singular_value(p, lam) >= 1e-6


@pytest.mark.parametrize("d,n", [(2, 2), (3, 3)])
def test_local_dimension(d, n):
    p = Params(d, n)
    g1 = build_graph(p, 1)
    assert local_system(p, 0.3).shape == (g1.num_vertices - 2**d,) * 2


def _usable(p, mu):
    # branch values where extension works and the side formula is defined
    for lam in inverse_branches(p, min(max(mu, 0.0), float(p.top_value))):
        if not is_forbidden(p, lam) and abs(2 - p.N * lam) > 1e-6:
            yield lam


def _solved_cells(d, n):
    p = Params(d, n)
    g0, g1, g2 = (build_graph(p, m) for m in range(3))
    for mu, f in _eigenpairs(g0):
        for lam in _usable(p, mu):
            ef = extend_eigenfunction(g0, g1, f, lam)
            yield p, cell_trace(g0, g1, 0, ef.values, lam)
            for lam2 in _usable(p, lam):
                ef2 = extend_eigenfunction(g1, g2, ef.values, lam2)
                for cell in range(g1.cells.shape[0]):
                    yield p, cell_trace(g1, g2, cell, ef2.values, lam2)


@pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_cell_identities(d, n):
    count = 0
    for p, tr in _solved_cells(d, n):
        t, J, L, N = tr.t, tr.J, tr.L, p.N
        k = p.corners
        scale = 1 + np.max(np.abs(J[:, :n]))
        # ghost recurrence
        assert np.allclose(J[:, n], 2 * t * J[:, n - 1] - J[:, n - 2])
        for i in range(k):
            # closed-form arm values
            for j in range(1, n + 1):
                assert arm_closed_form(t, J[i, 0], J[i, 1], j) == pytest.approx(J[i, j - 1], abs=1e-9 * scale)
            # side vertices
            for j in range(n - 1):
                expected = side_values(t, J[i, j], J[i, j + 1])
                assert np.allclose(L[i, j][~np.isnan(L[i, j])], expected, atol=1e-9 * scale)
            # sum over the other arms at the center cell
            others = J[np.arange(k) != i, n - 1].sum()
            rhs = (t + N) / (t + 1) * J[i, n] + (N - 1) / (t + 1) * J[i, n - 1]
            assert others == pytest.approx(rhs, abs=1e-9 * scale)
        ghost_sum = J[1:, n].sum()
        rhs = (N * t - t) / (t + 1) * J[0, n] + (N * t + 1) / (t + 1) * J[0, n - 1]
        assert ghost_sum == pytest.approx(rhs, abs=1e-9 * scale)
        count += 1
    assert count > 0


def test_cell_trace_nonjunction_arm():
    # at a boundary corner of a Neumann eigenfunction the arm is T_{j-1}(t) J_1
    p = Params(2, 3)
    g0, g1 = build_graph(p, 0), build_graph(p, 1)
    f0 = np.array([3.0, -1, -1, -1])
    lam = inverse_branches(p, 4 / 3)[0]
    assert not is_forbidden(p, lam)
    ef = extend_eigenfunction(g0, g1, f0, lam)
    tr = cell_trace(g0, g1, 0, ef.values, lam)
    for i in range(4):
        for j in range(1, 4):
            assert tr.J[i, j - 1] == pytest.approx(eval_T(j - 1, tr.t) * tr.J[i, 0], abs=1e-10)
    assert float(eval_R(p, lam)) == pytest.approx(4 / 3)

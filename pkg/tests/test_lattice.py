import itertools
import random

import numpy as np
import pytest
import scipy.sparse.csgraph as csg
from hypothesis import given, settings, strategies as st

from vicsek.decim import Params
from vicsek.errors import CapacityExceeded, InconclusiveBound, OmegaParseError
from vicsek.graph import _letter_offset
from vicsek.lattice import (
    OmegaSeq,
    build_blowup_tree,
    center_matrix,
    gamma_oracle_iso,
    iso_decide_periodic,
    lattice_center_matrix,
    parse_omega,
    random_omega,
    random_omega_pair,
    thm56_check,
)

P22, P23, P32 = Params(2, 2), Params(2, 3), Params(3, 2)


def w(text, params=None):
    return parse_omega(text, params)


def test_parse_examples():
    o = w("0,(1,1)|(2,1),(4,1)", P22)
    assert o.prefix == (0, (1, 1)) and o.cycle == ((2, 1), (4, 1))
    assert [o.letter(k) for k in range(1, 7)] == [0, (1, 1), (2, 1), (4, 1), (2, 1), (4, 1)]
    assert o.word(3) == (0, (1, 1), (2, 1))
    assert str(o) == "0,(1,1)|(2,1),(4,1)"
    assert w(" ( 1 , 1 ) | 0 ") == OmegaSeq(((1, 1),), (0,))
    assert w("|0") == OmegaSeq()
    with pytest.raises(IndexError):
        o.letter(0)


@pytest.mark.parametrize(
    "text,message,pos",
    [
        ("(5,1)|0", "i out of range 1..4", 0),
        ("0,(1,2)|0", "j out of range 1..1", 2),
        ("(1,1)", "missing '|'", 5),
        ("(1,1)|", "cycle must contain", 6),
        ("(1,x)|0", "expected an integer", 3),
        ("2|0", "letter must be 0 or (i,j)", 0),
        ("0|0)", "unexpected character", 3),
        ("(1 1)|0", "expected ','", 3),
    ],
)
def test_parse_errors(text, message, pos):
    with pytest.raises(OmegaParseError) as exc:
        parse_omega(text, P22)
    assert message in str(exc.value)
    assert exc.value.position == pos


def test_validate():
    with pytest.raises(ValueError):
        OmegaSeq((), ())
    assert w("|(3,1)").validate(P22).cycle == ((3, 1),)
    with pytest.raises(ValueError):
        w("|(9,1)").validate(P22)
    with pytest.raises(ValueError):
        w("|(1,2)").validate(P22)


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_str_parse_roundtrip(seed):
    o = random_omega(P32, random.Random(seed))
    assert parse_omega(str(o), P32) == o


def test_tree_examples():
    t0 = build_blowup_tree(P22, OmegaSeq(), 0)
    assert (t0.num_vertices, len(t0.edges)) == (5, 4)
    t1 = build_blowup_tree(P22, w("|(1,1)"), 1)
    assert (t1.num_vertices, len(t1.edges)) == (21, 20)
    t = build_blowup_tree(P22, w("0|(1,1)"), 3)
    assert t.centers[0] == t.centers[1]
    assert np.all(t.coords >= 0) and np.all(t.coords <= t.scale)


@pytest.mark.parametrize("params", [P22, P23, P32])
def test_tree_is_tree(params):
    rng = random.Random(5)
    for h in range(3):
        t = build_blowup_tree(params, random_omega(params, rng), h)
        assert len(t.edges) == t.num_vertices - 1
        ncomp, _ = csg.connected_components(t.adjacency(), directed=False)
        assert ncomp == 1


def test_tree_nesting():
    # the horizon-m tree sits inside the horizon-h tree as the cell containing c_0
    o = w("(2,1)|(1,1),0,(3,2)", P23)
    big = build_blowup_tree(P23, o, 3)
    for m in range(3):
        small = build_blowup_tree(P23, o, m)
        word = tuple(reversed(o.word(3)))[: 3 - m]
        origin = np.zeros(2, dtype=np.int64)
        for e, a in enumerate(word):
            origin = origin + 2 * 5 ** (2 - e) * _letter_offset(P23, a)
        moved = small.coords + origin
        idx = [big.index_of(x) for x in moved]
        assert len(set(idx)) == small.num_vertices
        # the c_k with k <= m coincide
        assert [idx[c] for c in small.centers] == big.centers[: m + 1]


def test_capacity(monkeypatch):
    monkeypatch.setenv("VICSEK_MAX_LEVEL", "2")
    with pytest.raises(CapacityExceeded):
        build_blowup_tree(P22, OmegaSeq(), 3)
    # the compressed distance computation is not limited by the full tree
    assert center_matrix(P22, w("|(1,1)"), 0, 12).size == 13


@pytest.mark.parametrize("n", [2, 3, 4])
def test_first_step_distance(n):
    p = Params(2, n)
    for j in range(1, n):
        cm = center_matrix(p, w(f"({2},{j})|0"), 0, 3)
        assert cm.distances[0, 1] == 2 * (n - j)


def test_center_matrix_examples():
    cm = center_matrix(P22, w("|(1,1)"), 0, 4)
    assert cm.distances.shape == (5, 5)
    assert [cm.distances[k, k + 1] for k in range(4)] == [2, 6, 18, 54]
    assert not center_matrix(P22, OmegaSeq(), 0, 5).distances.any()
    sub = center_matrix(P22, w("|(1,1)"), 2, 4)
    assert sub.base == 2 and np.array_equal(sub.distances, cm.distances[2:, 2:])
    with pytest.raises(ValueError):
        center_matrix(P22, OmegaSeq(), 3, 2)
    with pytest.raises(ValueError):
        center_matrix(P22, OmegaSeq(), 0, 2, method="nope")


def _is_tree_metric(D):
    k = len(D)
    if not (np.array_equal(D, D.T) and not np.diag(D).any()):
        return False
    for a, b, c in itertools.product(range(k), repeat=3):
        if D[a, c] > D[a, b] + D[b, c]:
            return False
    for a, b, c, e in itertools.combinations(range(k), 4):
        s = sorted([D[a, b] + D[c, e], D[a, c] + D[b, e], D[a, e] + D[b, c]])
        if s[1] != s[2]:
            return False
    return True


@pytest.mark.parametrize("params,h", [(P22, 4), (P23, 3), (P32, 3)])
def test_three_constructions_agree(params, h):
    rng = random.Random(11)
    for _ in range(6):
        o = random_omega(params, rng)
        full = center_matrix(params, o, 0, h, method="full")
        assert center_matrix(params, o, 0, h) == full
        assert lattice_center_matrix(params, o, 0, h) == full
        assert _is_tree_metric(full.distances)


def test_lattice_graph_isomorphism_matches_tree():
    rng = random.Random(2)
    for _ in range(20):
        a, b = random_omega_pair(P22, rng)
        lat = lattice_center_matrix(P22, a, 1, 4) == lattice_center_matrix(P22, b, 1, 4)
        assert lat == gamma_oracle_iso(P22, a, b, 2, 4)


def test_gamma_examples():
    o = w("(2,1)|0,(3,1)")
    assert gamma_oracle_iso(P22, o, o, 1, 6)
    assert gamma_oracle_iso(P22, w("|0"), w("(1,1)|0"), 2, 6)
    assert not gamma_oracle_iso(P22, w("|0"), w("(1,1)|0"), 1, 6)
    for M in range(1, 6):
        assert not gamma_oracle_iso(P23, w("|(1,1)"), w("|(1,2)"), M, 6)
    with pytest.raises(ValueError):
        gamma_oracle_iso(P22, o, o, 0, 6)


def test_thm56_examples():
    assert not thm56_check(P22, w("|(1,1),(4,1)"), w("|(1,1),(2,1)"), 1, 8)
    assert thm56_check(P22, w("|(1,1)"), w("|(2,1)"), 1, 8)
    o = w("(3,1),0|(2,1),(1,1)")
    for M in range(1, 5):
        assert thm56_check(P22, o, o, M, 9)
    with pytest.raises(ValueError):
        thm56_check(P22, o, o, 0, 4)
    with pytest.raises(ValueError):
        thm56_check(P22, o, o, 5, 4)


@pytest.mark.parametrize("params", [P22, P23, P32])
def test_thm56_matches_oracle(params):
    rng = random.Random(99)
    for _ in range(60):
        a, b = random_omega_pair(params, rng)
        M = rng.randint(1, 3)
        assert thm56_check(params, a, b, M, 8) == gamma_oracle_iso(params, a, b, M, 8)
        assert thm56_check(params, a, b, M, 8) == thm56_check(params, b, a, M, 8)


def test_monotone_truncation():
    rng = random.Random(4)
    for _ in range(20):
        a, b = random_omega_pair(P22, rng)
        seen_false = False
        for h in range(2, 9):
            ok = gamma_oracle_iso(P22, a, b, 2, h)
            assert not (seen_false and ok)
            seen_false |= not ok


def test_iso_decide_examples():
    assert iso_decide_periodic(P22, w("|0"), w("(1,1)|0"), 8) == (True, 2)
    # prefix-perturbed: tails identical
    a, b = w("(2,1),0,(3,1)|(1,1),0"), w("(4,1)|(1,1),0")
    assert iso_decide_periodic(P22, a, b, 8) == (True, 4)
    assert iso_decide_periodic(P23, w("|(1,1)"), w("|(1,2)"), 8) == (False, None)
    o = w("(1,1)|(2,1),0")
    assert iso_decide_periodic(P22, o, o, 8) == (True, 1)
    assert iso_decide_periodic(P22, w("|(1,1),(4,1)"), w("|(1,1),(2,1)"), 8) == (False, None)


def test_iso_decide_inconclusive():
    a, b = w("(1,1),(1,1),(1,1),(1,1)|0"), w("|0")
    with pytest.raises(InconclusiveBound) as exc:
        iso_decide_periodic(P22, a, b, 2)
    assert exc.value.witness == 5
    assert iso_decide_periodic(P22, a, b, 5) == (True, 5)
    with pytest.raises(ValueError):
        iso_decide_periodic(P22, a, b, 0)


@pytest.mark.parametrize("params", [P22, P32])
def test_iso_decide_against_long_horizon(params):
    rng = random.Random(17)
    for _ in range(40):
        a, b = random_omega_pair(params, rng)
        brute = next((M for M in range(1, 13) if thm56_check(params, a, b, M, 40)), None)
        got = iso_decide_periodic(params, a, b, 12)
        assert got == ((True, brute) if brute else (False, None))

"""Vicsek set lattices and trees generated by an address sequence.

A sequence ``ω`` over the alphabet ``W_1`` blows the level-h graph up into
``V_{-h} = φ_{[ω]_h} V_h``.  Up to translation the truncated tree is just the
level-h star tree of the unit cube; what ``ω`` controls is where the nested
centers ``c_k = φ_{[ω]_k} q_0`` sit inside it.  Everything here works in that
frame: ``c_k`` is the center of the cell addressed by ``ω_h ω_{h-1} ... ω_{k+1}``.

Two isomorphism tests are provided and can be checked against each other:

* :func:`thm56_check` evaluates the letter conditions on ``(0-pattern, j, i)``.
* :func:`gamma_oracle_iso` compares the center-to-center tree distance
  matrices, which determine the spanned subtree up to anchored isomorphism.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra, shortest_path

from .decim import Params
from .errors import CapacityExceeded, InconclusiveBound, OmegaParseError
from .graph import _letter_offset, build_graph, corner, letters, max_level, opposite

__all__ = [
    "OmegaSeq",
    "parse_omega",
    "BlowupTree",
    "build_blowup_tree",
    "CenterMatrix",
    "center_matrix",
    "lattice_center_matrix",
    "gamma_oracle_iso",
    "thm56_check",
    "iso_decide_periodic",
    "random_omega",
    "random_omega_pair",
]


# -- address sequences -------------------------------------------------------


def _check_letter(letter, params: Params | None):
    if letter == 0:
        return 0
    i, j = letter
    if params is not None:
        if not 1 <= i <= params.corners:
            raise ValueError(f"i out of range 1..{params.corners}")
        if not 1 <= j <= params.n - 1:
            raise ValueError(f"j out of range 1..{params.n - 1}")
    return (int(i), int(j))


@dataclass(frozen=True)
class OmegaSeq:
    """Eventually periodic sequence ``prefix · cycle^∞`` over ``W_1``.

    Letters are ``0`` (the center cell) or pairs ``(i, j)`` with
    ``1 <= i <= 2^d`` and ``1 <= j <= n - 1``.
    """

    prefix: tuple = ()
    cycle: tuple = (0,)

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("cycle must be nonempty")
        object.__setattr__(self, "prefix", tuple(_check_letter(a, None) for a in self.prefix))
        object.__setattr__(self, "cycle", tuple(_check_letter(a, None) for a in self.cycle))

    def validate(self, params: Params) -> "OmegaSeq":
        for a in self.prefix + self.cycle:
            _check_letter(a, params)
        return self

    def letter(self, m: int):
        """The letter ``ω_m`` (1-based)."""
        if m < 1:
            raise IndexError("letters are indexed from 1")
        if m <= len(self.prefix):
            return self.prefix[m - 1]
        return self.cycle[(m - 1 - len(self.prefix)) % len(self.cycle)]

    def word(self, m: int) -> tuple:
        """``[ω]_m = ω_1 ... ω_m``."""
        return tuple(self.letter(k) for k in range(1, m + 1))

    def __str__(self):
        def fmt(a):
            return "0" if a == 0 else f"({a[0]},{a[1]})"

        return ",".join(map(fmt, self.prefix)) + "|" + ",".join(map(fmt, self.cycle))

    @classmethod
    def parse(cls, text: str, params: Params | None = None) -> "OmegaSeq":
        return parse_omega(text, params)


class _Scanner:
    def __init__(self, text: str, params: Params | None):
        self.text = text
        self.pos = 0
        self.params = params

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            raise OmegaParseError(f"expected {ch!r}, found {found!r}", self.pos)
        self.pos += 1

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            found = self.text[start] if start < len(self.text) else "end of input"
            raise OmegaParseError(f"expected an integer, found {found!r}", start)
        return int(self.text[start:self.pos])

    def letter(self):
        start = self.pos
        if self.peek() == "(":
            self.pos += 1
            i = self.integer()
            self.expect(",")
            j = self.integer()
            self.expect(")")
            try:
                return _check_letter((i, j), self.params)
            except ValueError as exc:
                raise OmegaParseError(str(exc), start) from None
        value = self.integer()
        if value != 0:
            raise OmegaParseError(f"letter must be 0 or (i,j), found {value}", start)
        return 0

    def letters_until(self, stop: str) -> list:
        out = []
        if self.peek() in (stop, ""):
            return out
        while True:
            out.append(self.letter())
            nxt = self.peek()
            if nxt == ",":
                self.pos += 1
                continue
            if nxt in (stop, ""):
                return out
            raise OmegaParseError(f"unexpected character {nxt!r}", self.pos)


def parse_omega(text: str, params: Params | None = None) -> OmegaSeq:
    """Parse ``"prefix|cycle"``, e.g. ``"0,(1,1)|(2,1),(4,1)"``."""
    sc = _Scanner(text, params)
    prefix = sc.letters_until("|")
    if sc.peek() != "|":
        raise OmegaParseError("missing '|' between prefix and cycle", sc.pos)
    sc.pos += 1
    cycle = sc.letters_until("")
    if sc.peek():
        raise OmegaParseError(f"unexpected character {sc.peek()!r}", sc.pos)
    if not cycle:
        raise OmegaParseError("cycle must contain at least one letter", sc.pos)
    return OmegaSeq(tuple(prefix), tuple(cycle))


# -- geometry in the frame of V_{-h} ----------------------------------------


def _cell_origin(params: Params, word: Sequence, h: int) -> np.ndarray:
    """Corner ``F_word(q_1)`` of a cell, at scale ``2(2n-1)^h``."""
    ratio = 2 * params.n - 1
    x = np.zeros(params.d, dtype=np.int64)
    e = h
    for a in word:
        e -= 1
        x = x + 2 * ratio**e * _letter_offset(params, a)
    return x


def _center_coords(params: Params, omega: OmegaSeq, h: int) -> list[np.ndarray]:
    """``c_0 .. c_h`` at scale ``2(2n-1)^h``."""
    ratio = 2 * params.n - 1
    rev = tuple(reversed(omega.word(h)))  # ω_h ... ω_1
    out = []
    for k in range(h + 1):
        u = rev[: h - k]
        out.append(_cell_origin(params, u, h) + ratio**k)
    return out


@dataclass
class BlowupTree:
    """Finite truncation of the Vicsek set tree with star edges only."""

    params: Params
    omega: OmegaSeq
    horizon: int
    coords: np.ndarray
    edges: np.ndarray
    centers: list[int]

    @property
    def num_vertices(self) -> int:
        return len(self.coords)

    @property
    def scale(self) -> int:
        return 2 * (2 * self.params.n - 1) ** self.horizon

    def adjacency(self) -> sp.csr_matrix:
        v = self.num_vertices
        e = self.edges
        data = np.ones(2 * len(e))
        return sp.csr_matrix(
            (data, (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(v, v)
        )

    def index_of(self, point) -> int:
        return self._lookup[tuple(int(x) for x in point)]

    def __post_init__(self):
        self._lookup = {tuple(int(x) for x in row): k for k, row in enumerate(self.coords)}


def build_blowup_tree(params: Params, omega: OmegaSeq, h: int) -> BlowupTree:
    """Materialize every vertex and star edge of ``Ṽ_{-h}``."""
    if h < 0:
        raise ValueError("horizon must be nonnegative")
    omega.validate(params)
    if h > max_level(params):
        raise CapacityExceeded(f"horizon {h} exceeds the capacity bound for full trees")
    g = build_graph(params, h)
    one = np.ones(params.d, dtype=g.coords.dtype)
    cell_centers = g.coords[g.cells[:, 0]] + one
    coords = np.concatenate([g.coords, cell_centers])
    nv = g.num_vertices
    center_ids = nv + np.arange(len(cell_centers))
    edges = np.stack(
        [np.repeat(center_ids, params.corners), g.cells.ravel()], axis=1
    )
    tree = BlowupTree(params, omega, h, coords, edges, [])
    tree.centers = [tree.index_of(c) for c in _center_coords(params, omega, h)]
    return tree


def _compressed_tree(params: Params, omega: OmegaSeq, h: int):
    """Weighted tree equivalent to ``Ṽ_{-h}`` for center distances.

    Only the chain of cells containing ``c_0`` is subdivided; every other
    cell of exponent ``e`` is a star whose arms have length ``(2n-1)^e``,
    which is exactly the corner-to-center distance inside it.
    """
    ratio = 2 * params.n - 1
    ids: dict[tuple, int] = {}
    rows: list[int] = []
    cols: list[int] = []
    wts: list[int] = []

    def node(p) -> int:
        key = tuple(int(x) for x in p)
        if key not in ids:
            ids[key] = len(ids)
        return ids[key]

    corners = [2 * corner(params, k) for k in range(1, params.corners + 1)]

    def star(origin, e):
        c = node(origin + ratio**e)
        for q in corners:
            rows.append(c)
            cols.append(node(origin + ratio**e * q))
            wts.append(ratio**e)

    chain = tuple(reversed(omega.word(h)))
    origin = np.zeros(params.d, dtype=np.int64)
    for depth, nxt in enumerate(chain):
        e = h - depth
        for a in letters(params):
            sub = origin + 2 * ratio ** (e - 1) * _letter_offset(params, a)
            if a == nxt:
                chosen = sub
            else:
                star(sub, e - 1)
        origin = chosen
    star(origin, 0)
    n = len(ids)
    mat = sp.csr_matrix((wts, (rows, cols)), shape=(n, n))
    return mat, ids


@dataclass(frozen=True)
class CenterMatrix:
    base: int
    distances: np.ndarray  # D[k-base][l-base] = dist(c_k, c_l)

    @property
    def size(self) -> int:
        return len(self.distances)

    def __eq__(self, other):
        if not isinstance(other, CenterMatrix):
            return NotImplemented
        return self.base == other.base and np.array_equal(self.distances, other.distances)

    def __hash__(self):
        return hash((self.base, self.distances.tobytes()))


def _all_center_distances(params: Params, omega: OmegaSeq, h: int, method: str) -> np.ndarray:
    centers = _center_coords(params, omega, h)
    if method == "compressed":
        mat, ids = _compressed_tree(params, omega, h)
        src = [ids[tuple(int(x) for x in c)] for c in centers]
        dist = dijkstra(mat, directed=False, indices=src)[:, src]
    elif method == "full":
        tree = build_blowup_tree(params, omega, h)
        dist = shortest_path(
            tree.adjacency(), directed=False, unweighted=True, indices=tree.centers
        )[:, tree.centers]
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.rint(dist).astype(np.int64)


def center_matrix(
    params: Params, omega: OmegaSeq, M: int, h: int, method: str = "compressed"
) -> CenterMatrix:
    """Tree distances between the centers ``c_M .. c_h``."""
    if not 0 <= M <= h:
        raise ValueError(f"need 0 <= M <= h, got M={M}, h={h}")
    omega.validate(params)
    dist = _all_center_distances(params, omega, h, method)
    return CenterMatrix(M, dist[M:, M:])


def lattice_center_matrix(params: Params, omega: OmegaSeq, M: int, h: int) -> CenterMatrix:
    """Center distances recovered from the lattice graph ``V_{-h}`` alone.

    The lattice graph replaces every star by a complete graph on the cell
    corners, so a center-to-center path costs ``2 d_V(a, b) + 2`` for the
    best corners ``a``, ``b`` of the two unit cells (``0`` for the same cell).
    """
    if not 0 <= M <= h:
        raise ValueError(f"need 0 <= M <= h, got M={M}, h={h}")
    omega.validate(params)
    g = build_graph(params, h)
    alphabet = letters(params)
    base = len(alphabet)
    rev = tuple(reversed(omega.word(h)))
    unit_cells = []
    for k in range(h + 1):
        word = rev[: h - k] + (0,) * k
        c = 0
        for a in word:
            c = c * base + alphabet.index(a)
        unit_cells.append(c)
    corner_sets = [g.cells[c] for c in unit_cells]
    all_corners = np.unique(np.concatenate(corner_sets))
    dv = shortest_path(g.adjacency, directed=False, unweighted=True, indices=all_corners)
    pos = {v: r for r, v in enumerate(all_corners)}
    size = h + 1
    out = np.zeros((size, size), dtype=np.int64)
    for k in range(size):
        for l in range(size):
            if unit_cells[k] == unit_cells[l]:
                continue
            rows = [pos[a] for a in corner_sets[k]]
            out[k, l] = int(2 * dv[np.ix_(rows, corner_sets[l])].min() + 2)
    return CenterMatrix(M, out[M:, M:])


# -- isomorphism ---------------------------------------------------------------


def gamma_oracle_iso(
    params: Params,
    omega: OmegaSeq,
    omega_prime: OmegaSeq,
    M: int,
    h: int,
    method: str = "compressed",
) -> bool:
    """Anchored isomorphism of the center-spanned subtrees, by distance matrices.

    The letter ``ω_M`` governs the path from ``c_{M-1}`` to ``c_M``, so the
    comparison that matches the letter conditions at ``m >= M`` starts from
    ``c_{M-1}``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    return center_matrix(params, omega, M - 1, h, method) == center_matrix(
        params, omega_prime, M - 1, h, method
    )


def _chain_ok(params: Params, omega: OmegaSeq, lo: int, m: int) -> bool:
    # ω_{m''} = 0 or i_{m''} = 2^d + 1 - i_m for all lo <= m'' < m
    target = opposite(params, omega.letter(m)[0])
    for k in range(lo, m):
        a = omega.letter(k)
        if a != 0 and a[0] != target:
            return False
    return True


def thm56_check(params: Params, omega: OmegaSeq, omega_prime: OmegaSeq, M: int, h: int) -> bool:
    """Letter conditions (a), (b), (c) for every ``M <= m <= h``."""
    if M < 1 or h < M:
        raise ValueError(f"need 1 <= M <= h, got M={M}, h={h}")
    omega.validate(params)
    omega_prime.validate(params)
    for m in range(M, h + 1):
        a, b = omega.letter(m), omega_prime.letter(m)
        if (a == 0) != (b == 0):
            return False
        if a == 0:
            continue
        if a[1] != b[1]:
            return False
        for lo in range(M, m + 1):
            if _chain_ok(params, omega, lo, m) != _chain_ok(params, omega_prime, lo, m):
                return False
    return True


def iso_decide_periodic(
    params: Params, omega: OmegaSeq, omega_prime: OmegaSeq, search_bound: int
) -> tuple[bool, int | None]:
    """Decide lattice isomorphism for eventually periodic sequences.

    Returns ``(True, M)`` with the smallest witness ``M <= search_bound`` or
    ``(False, None)`` when no witness exists at all.  If the only witnesses
    lie beyond ``search_bound`` :class:`InconclusiveBound` is raised with
    the smallest one attached.
    """
    if search_bound < 1:
        raise ValueError("search bound must be >= 1")
    start = max(len(omega.prefix), len(omega_prime.prefix))
    period = math.lcm(len(omega.cycle), len(omega_prime.cycle))

    def holds(M: int) -> bool:
        # one aligned period past the prefixes is enough; three leave slack for
        # the look-back in condition (c)
        return thm56_check(params, omega, omega_prime, M, max(M, start) + 3 * period + 1)

    for M in range(1, search_bound + 1):
        if holds(M):
            return True, M
    # the conditions are monotone in M and period-invariant past the prefixes
    last = start + period + 1
    if last <= search_bound or not holds(last):
        return False, None
    witness = next(M for M in range(search_bound + 1, last + 1) if holds(M))
    raise InconclusiveBound(
        f"no witness M <= {search_bound}; smallest witness is M = {witness}", witness
    )


# -- random sequences ------------------------------------------------------------


def _random_letter(params: Params, rng: random.Random, pool_i=None):
    if rng.random() < 0.25:
        return 0
    i = rng.choice(pool_i) if pool_i else rng.randint(1, params.corners)
    return (i, rng.randint(1, params.n - 1))


def random_omega(params: Params, rng: random.Random, max_prefix=3, max_cycle=3) -> OmegaSeq:
    pool = _corner_pool(params, rng)
    prefix = tuple(_random_letter(params, rng, pool) for _ in range(rng.randint(0, max_prefix)))
    cycle = tuple(_random_letter(params, rng, pool) for _ in range(rng.randint(1, max_cycle)))
    return OmegaSeq(prefix, cycle)


def _corner_pool(params: Params, rng: random.Random) -> list[int]:
    # a corner, its opposite and one more, so chaining patterns occur often
    a = rng.randint(1, params.corners)
    b = rng.randint(1, params.corners)
    return [a, opposite(params, a), b]


def _reshuffle_i(params: Params, rng: random.Random, seq: Iterable, pool) -> tuple:
    return tuple(a if a == 0 else (rng.choice(pool), a[1]) for a in seq)


def _corner_symmetry(params: Params, rng: random.Random):
    # coordinate permutation plus bit flips: commutes with taking opposites
    perm = list(range(params.d))
    rng.shuffle(perm)
    flips = [rng.randint(0, 1) for _ in range(params.d)]

    def act(i: int) -> int:
        bits = [((i - 1) >> l) & 1 for l in range(params.d)]
        new = [bits[perm[l]] ^ flips[l] for l in range(params.d)]
        return 1 + sum(b << l for l, b in enumerate(new))

    return act


def random_omega_pair(params: Params, rng: random.Random) -> tuple[OmegaSeq, OmegaSeq]:
    """A pair of eventually periodic sequences drawn from a mix of strategies
    that produce both isomorphic and non-isomorphic lattices."""
    omega = random_omega(params, rng)
    kind = rng.randrange(4)
    if kind == 0:
        return omega, random_omega(params, rng)
    if kind == 1:
        pool = _corner_pool(params, rng)
        return omega, OmegaSeq(
            _reshuffle_i(params, rng, omega.prefix, pool),
            _reshuffle_i(params, rng, omega.cycle, pool),
        )
    if kind == 2:
        act = _corner_symmetry(params, rng)
        moved = tuple(a if a == 0 else (act(a[0]), a[1]) for a in omega.prefix + omega.cycle)
        prefix = moved[: len(omega.prefix)]
        cycle = moved[len(omega.prefix):]
        if prefix and rng.random() < 0.5:
            k = rng.randrange(len(prefix))
            prefix = prefix[:k] + (_random_letter(params, rng),) + prefix[k + 1:]
        return omega, OmegaSeq(prefix, cycle)
    # same tail, different prefix
    prefix = tuple(_random_letter(params, rng) for _ in range(rng.randint(0, 3)))
    return omega, OmegaSeq(prefix, omega.cycle)

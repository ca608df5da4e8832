"""Spectral decimation for Vicsek set graphs.

The decimation polynomial ``R`` maps an eigenvalue of ``-Δ_{m+1}`` to the
eigenvalue of ``-Δ_m`` carried by the restricted eigenfunction.  Running it
backwards along its ``2n - 1`` inverse branches regenerates the complete
Neumann and Dirichlet spectra of every level from a handful of seeds.

All polynomials are handled in the eigenvalue variable ``λ`` with exact
integer coefficients (``t = 1 - Nλ`` substituted symbolically).  Roots are
bracketed on a rational grid with exact sign evaluation and refined by
exact bisection, so clustered roots never suffer from float cancellation.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .cheb import IntPoly, cheb_coeffs, eval_T, eval_U
from .errors import DomainError, InvalidParams, RootCountMismatch

log = logging.getLogger(__name__)

__all__ = [
    "Params",
    "SpectralPoint",
    "ForbiddenSet",
    "Genealogy",
    "SpectrumEntry",
    "Spectrum",
    "r_coeffs",
    "s_coeffs",
    "a_coeffs",
    "eval_R",
    "eval_S",
    "eval_A",
    "isolate_roots",
    "forbidden_set",
    "is_forbidden",
    "distance_to_forbidden",
    "inverse_branches",
    "psi_word",
    "neumann_spectrum",
    "dirichlet_spectrum",
]

GRID_CELLS = 2**14
ROOT_WIDTH = 1e-15
FORBIDDEN_ATOL = 1e-9
MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Params:
    """Dimension ``d`` and branch length ``n`` of the Vicsek set."""

    d: int
    n: int

    def __post_init__(self):
        for name in ("d", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise InvalidParams(f"{name} must be an integer, got {v!r}")
            if v < 2:
                raise InvalidParams(f"{name} must satisfy {name} >= 2, got {v}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))

    @property
    def corners(self) -> int:
        """Number of cube corners, ``2^d``."""
        return 2**self.d

    @property
    def N(self) -> int:
        return 2**self.d - 1

    @property
    def cell_count(self) -> int:
        """Number of distinct contractions, ``2^d n - 2^d + 1``."""
        return 2**self.d * self.n - 2**self.d + 1

    @property
    def contraction(self) -> Fraction:
        return Fraction(1, 2 * self.n - 1)

    @property
    def top_value(self) -> Fraction:
        return Fraction(2**self.d, 2**self.d - 1)

    @property
    def num_branches(self) -> int:
        return 2 * self.n - 1

    def vertex_count(self, m: int) -> int:
        return self.cell_count**m * self.N + 1

    def edge_count(self, m: int) -> int:
        return math.comb(self.corners, 2) * self.cell_count**m


@dataclass(frozen=True)
class SpectralPoint:
    lam: float
    t: float

    @classmethod
    def from_lambda(cls, params: Params, lam) -> "SpectralPoint":
        return cls(lam, 1 - params.N * lam)


# -- exact polynomials in λ -------------------------------------------------


def _t_poly(params: Params) -> IntPoly:
    return IntPoly((1, -params.N))


def _cheb_in_lambda(params: Params, kind: str, k: int) -> IntPoly:
    return cheb_coeffs(kind, k).compose(_t_poly(params))


@lru_cache(maxsize=None)
def r_coeffs(params: Params) -> IntPoly:
    """Integer coefficients of the decimation polynomial in ``λ``."""
    n = params.n
    t = _t_poly(params)
    lam = IntPoly.x()
    u1 = _cheb_in_lambda(params, "second", n - 1)
    u2 = _cheb_in_lambda(params, "second", n - 2)
    return 1 + (lam - 1) * u1 * u1 + (t + lam + 1) * u1 * u2 - t * u2 * u2


@lru_cache(maxsize=None)
def s_coeffs(params: Params) -> IntPoly:
    """Symmetric forbidden factor ``T_n(t) + N T_{n-1}(t)``."""
    n = params.n
    return _cheb_in_lambda(params, "first", n) + params.N * _cheb_in_lambda(
        params, "first", n - 1
    )


@lru_cache(maxsize=None)
def a_coeffs(params: Params) -> IntPoly:
    """Antisymmetric forbidden factor ``U_{n-1}(t) + U_{n-2}(t)``."""
    n = params.n
    return _cheb_in_lambda(params, "second", n - 1) + _cheb_in_lambda(
        params, "second", n - 2
    )


@lru_cache(maxsize=None)
def top_factor_coeffs(params: Params) -> IntPoly:
    """``U_{n-2}(t) - U_{n-1}(t)``: the non-forbidden part of ``NR - 2^d``."""
    n = params.n
    return _cheb_in_lambda(params, "second", n - 2) - _cheb_in_lambda(
        params, "second", n - 1
    )


@lru_cache(maxsize=None)
def zero_factor_coeffs(params: Params) -> IntPoly:
    """``U_{n-1}(t) + N U_{n-2}(t)``: the non-forbidden, nonzero part of ``R``."""
    n = params.n
    return _cheb_in_lambda(params, "second", n - 1) + params.N * _cheb_in_lambda(
        params, "second", n - 2
    )


def eval_R(params: Params, lam):
    """Decimation polynomial evaluated through the Chebyshev form."""
    n = params.n
    t = 1 - params.N * lam
    u1 = eval_U(n - 1, t)
    u2 = eval_U(n - 2, t)
    return 1 + (lam - 1) * u1 * u1 + (t + lam + 1) * u1 * u2 - t * u2 * u2


def eval_S(params: Params, lam):
    t = 1 - params.N * lam
    return eval_T(params.n, t) + params.N * eval_T(params.n - 1, t)


def eval_A(params: Params, lam):
    t = 1 - params.N * lam
    return eval_U(params.n - 1, t) + eval_U(params.n - 2, t)


# -- exact-sign root isolation ---------------------------------------------


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _grid_signs(poly: IntPoly, hi: Fraction, cells: int) -> list[int]:
    # p(hi*k/cells) * (hi.den*cells)^D as an integer polynomial in k.
    deg = poly.degree
    p, q = hi.numerator, hi.denominator * cells
    hom = IntPoly(c * p**i * q ** (deg - i) for i, c in enumerate(poly.coeffs))
    ks = np.arange(cells + 1, dtype=object)
    vals = hom(ks)
    if not isinstance(vals, np.ndarray):
        vals = np.full(cells + 1, vals, dtype=object)
    return [_sign(v) for v in vals]


def _bisect(poly: IntPoly, a: Fraction, b: Fraction, sa: int, width: float) -> Fraction:
    while b - a > width:
        mid = (a + b) / 2
        sm = _sign(poly(mid))
        if sm == 0:
            return mid
        if sm == sa:
            a = mid
        else:
            b = mid
    return (a + b) / 2


def isolate_roots(
    poly: IntPoly,
    hi: Fraction,
    expected: int,
    cells: int = GRID_CELLS,
    width: float = ROOT_WIDTH,
) -> list[Fraction]:
    """Find the ``expected`` simple roots of ``poly`` in ``[0, hi]``.

    Signs are evaluated exactly on a uniform rational grid with ``cells``
    intervals; each sign change is refined by exact bisection until the
    bracket is narrower than ``width``.  The grid is refined four-fold once
    before giving up with :class:`RootCountMismatch`.
    """
    hi = Fraction(hi)
    found: list[Fraction] = []
    for attempt in range(2):
        grid = cells * 4**attempt
        signs = _grid_signs(poly, hi, grid)
        step = hi / grid
        found = []
        for k, s in enumerate(signs):
            if s == 0:
                found.append(step * k)
            elif k + 1 <= grid and signs[k + 1] == -s:
                found.append(_bisect(poly, step * k, step * (k + 1), s, width))
        if len(found) == expected:
            return found
        log.debug("grid of %d cells found %d roots, expected %d", grid, len(found), expected)
    raise RootCountMismatch(
        f"expected {expected} roots in [0, {hi}], isolated {len(found)}"
    )


# -- forbidden set -----------------------------------------------------------


@dataclass(frozen=True)
class ForbiddenSet:
    top: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    def values(self) -> list[float]:
        return sorted([self.top, *self.alphas, *self.betas])

    def __len__(self):
        return 1 + len(self.alphas) + len(self.betas)


@lru_cache(maxsize=None)
def forbidden_set(params: Params) -> ForbiddenSet:
    """Top value plus the ``n`` roots of ``S`` and ``n - 1`` roots of ``A``."""
    top = params.top_value
    alphas = isolate_roots(s_coeffs(params), top, params.n)
    betas = isolate_roots(a_coeffs(params), top, params.n - 1)
    return ForbiddenSet(
        float(top), tuple(float(a) for a in alphas), tuple(float(b) for b in betas)
    )


def is_forbidden(params: Params, lam: float, atol: float = FORBIDDEN_ATOL) -> bool:
    """Membership test on the defining polynomial values."""
    # the top value 2^d/N is the root of 2^d - N*lambda, i.e. t = 1 - 2^d
    return (
        abs(params.corners - params.N * lam) <= atol
        or abs(eval_S(params, lam)) <= atol
        or abs(eval_A(params, lam)) <= atol
    )


def distance_to_forbidden(params: Params, lam: float) -> float:
    return min(abs(lam - v) for v in forbidden_set(params).values())


# -- inverse branches ----------------------------------------------------------


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


@lru_cache(maxsize=4096)
def _inverse_branches_exact(params: Params, target: Fraction) -> tuple[float, ...]:
    # b*R(λ) - a for target a/b keeps the polynomial integral
    a, b = target.numerator, target.denominator
    poly = IntPoly(b * c for c in r_coeffs(params).coeffs) - a
    roots = isolate_roots(poly, params.top_value, params.num_branches)
    return tuple(float(r) for r in roots)


def inverse_branches(params: Params, lam_prime) -> list[float]:
    """The ``2n - 1`` ascending solutions of ``R(λ) = lam_prime`` in ``[0, 1]``."""
    target = _as_fraction(lam_prime)
    top = params.top_value
    slack = Fraction(1, 10**12)
    if target < -slack or target > top + slack:
        raise DomainError(f"lambda' = {float(target)!r} outside [0, {top}]")
    target = min(max(target, Fraction(0)), top)
    return list(_inverse_branches_exact(params, target))


def psi_word(params: Params, word: Sequence[int], seed) -> float:
    """Apply ``ψ_{v_1}`` first, then ``ψ_{v_2}``, and so on."""
    value = seed
    for letter in word:
        if not 0 <= letter < params.num_branches:
            raise DomainError(f"branch index {letter} outside 0..{params.num_branches - 1}")
        value = inverse_branches(params, value)[letter]
    return float(value)


# -- spectra -----------------------------------------------------------------


@dataclass(frozen=True)
class Genealogy:
    """Seed (``top``, ``zero``, ``alpha``, ``beta``) and the branch word applied to it."""

    seed: str
    word: tuple[int, ...] = ()
    index: int | None = None

    @property
    def label(self) -> str:
        return self.seed if self.index is None else f"{self.seed}{self.index}"

    @property
    def word_str(self) -> str:
        return ".".join(str(k) for k in self.word)


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    genealogy: Genealogy


@dataclass
class Spectrum:
    entries: list[SpectrumEntry] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries], dtype=float)

    @property
    def multiplicities(self) -> list[int]:
        return [e.multiplicity for e in self.entries]

    @property
    def total_multiplicity(self) -> int:
        return sum(e.multiplicity for e in self.entries)

    def trace(self) -> float:
        return math.fsum(e.value * e.multiplicity for e in self.entries)

    def as_pairs(self) -> list[tuple[float, int]]:
        return [(e.value, e.multiplicity) for e in self.entries]

    def expanded(self) -> np.ndarray:
        """All eigenvalues repeated by multiplicity, ascending."""
        return np.repeat(self.values, self.multiplicities)


def _first_generation(params: Params, seed, factor: IntPoly) -> list[tuple[float, int]]:
    # branch values continuing from a seed, tagged with their branch index
    roots = [float(r) for r in isolate_roots(factor, params.top_value, params.n - 1)]
    branches = inverse_branches(params, seed)
    tagged = []
    for r in roots:
        idx = min(range(len(branches)), key=lambda k: abs(branches[k] - r))
        tagged.append((branches[idx], idx))
    return tagged


def _descendants(params: Params, value: float, word: tuple, depth: int, exact: bool):
    """Yield ``(value, word)`` for all extensions of ``word`` by up to ``depth``
    letters (only length exactly ``depth`` if ``exact``)."""
    if not exact or depth == 0:
        yield value, word
    if depth == 0:
        return
    for k, child in enumerate(inverse_branches(params, value)):
        yield from _descendants(params, child, word + (k,), depth - 1, exact)


def _seed_family(params: Params, seed, factor: IntPoly, max_len: int):
    """Seed itself plus descendants whose first letter is a factor root."""
    yield float(seed), ()
    if max_len < 1:
        return
    for value, idx in _first_generation(params, seed, factor):
        yield from _descendants(params, value, (idx,), max_len - 1, exact=False)


def _finalize(entries: list[SpectrumEntry]) -> Spectrum:
    entries.sort(key=lambda e: (e.value, e.genealogy.word, e.genealogy.label))
    merged: list[SpectrumEntry] = []
    for e in entries:
        if merged and abs(e.value - merged[-1].value) <= MERGE_TOL:
            prev = merged[-1]
            log.warning(
                "merging spectrum entries %r (%s) and %r (%s)",
                prev.value, prev.genealogy, e.value, e.genealogy,
            )
            merged[-1] = SpectrumEntry(
                prev.value, prev.multiplicity + e.multiplicity, prev.genealogy
            )
        else:
            merged.append(e)
    return Spectrum(merged)


def neumann_spectrum(params: Params, m: int) -> Spectrum:
    """Full Neumann spectrum of ``-Δ_m`` with multiplicities and genealogies."""
    if m < 0:
        raise ValueError(f"level must be nonnegative, got {m}")
    base = params.cell_count
    entries = []
    for value, word in _seed_family(params, params.top_value, top_factor_coeffs(params), m):
        mult = base ** (m - len(word)) * (params.corners - 2) + 1
        entries.append(SpectrumEntry(value, mult, Genealogy("top", word)))
    for value, word in _seed_family(params, Fraction(0), zero_factor_coeffs(params), m):
        entries.append(SpectrumEntry(value, 1, Genealogy("zero", word)))
    return _finalize(entries)


def dirichlet_spectrum(params: Params, m: int) -> Spectrum:
    """Full Dirichlet spectrum of ``-Δ_m``; empty at ``m = 0``."""
    if m < 0:
        raise ValueError(f"level must be nonnegative, got {m}")
    if m == 0:
        return Spectrum([])
    base = params.cell_count
    entries = []
    for value, word in _seed_family(params, params.top_value, top_factor_coeffs(params), m - 1):
        mult = base ** (m - len(word)) * (params.corners - 2) - params.corners + 1
        entries.append(SpectrumEntry(value, mult, Genealogy("top", word)))
    fs = forbidden_set(params)
    for i, alpha in enumerate(fs.alphas, start=1):
        for value, word in _descendants(params, alpha, (), m - 1, exact=True):
            entries.append(SpectrumEntry(value, 1, Genealogy("alpha", word, i)))
    for i, beta in enumerate(fs.betas, start=1):
        for value, word in _descendants(params, beta, (), m - 1, exact=False):
            entries.append(
                SpectrumEntry(value, params.corners - 1, Genealogy("beta", word, i))
            )
    return _finalize(entries)

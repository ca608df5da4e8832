"""Chebyshev polynomials of both kinds, exact integer coefficient forms,
and the arm kernels ``P_j = 2 T_j - U_j`` and ``Q_j = U_{j-1}``.

Evaluation always goes through the three-term recurrence, so it is valid
for any real argument (including ``|t| > 1``) and works elementwise on
numpy arrays as well as on ``int``/``Fraction`` scalars.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

__all__ = [
    "IntPoly",
    "eval_T",
    "eval_U",
    "eval_PQ",
    "cheb_coeffs",
]


def _strip(coeffs: Iterable[int]) -> tuple[int, ...]:
    c = [int(x) for x in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with arbitrary-precision integer coefficients.

    ``coeffs[k]`` multiplies ``x**k``; the zero polynomial has no coefficients.
    """

    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(self.coeffs))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def to_list(self) -> list[int]:
        return list(self.coeffs)

    def __call__(self, x):
        # Horner; exact for int/Fraction, elementwise for ndarrays.
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    @staticmethod
    def _coerce(other) -> "IntPoly":
        if isinstance(other, IntPoly):
            return other
        if isinstance(other, int):
            return IntPoly((other,))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        size = max(len(a), len(b))
        return IntPoly(
            (a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0)
            for k in range(size)
        )

    __radd__ = __add__

    def __neg__(self):
        return IntPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return IntPoly(out)

    __rmul__ = __mul__

    def compose(self, inner: "IntPoly") -> "IntPoly":
        """Return ``self(inner(x))``."""
        acc = IntPoly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def derivative(self) -> "IntPoly":
        return IntPoly(k * c for k, c in enumerate(self.coeffs) if k)


def eval_T(k: int, t):
    """Chebyshev polynomial of the first kind, ``T_0 = 1``, ``T_1 = t``."""
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    prev, cur = 1 + 0 * t, t
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2 * t * cur - prev
    return cur


def eval_U(k: int, t):
    """Chebyshev polynomial of the second kind, ``U_0 = 1``, ``U_1 = 2t``."""
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    prev, cur = 1 + 0 * t, 2 * t
    if k == 0:
        return prev
    for _ in range(k - 1):
        prev, cur = cur, 2 * t * cur - prev
    return cur


def eval_PQ(j: int, t):
    """Return ``(P_j(t), Q_j(t))`` with ``Q_0 = 0``."""
    if j < 0:
        raise ValueError(f"index must be nonnegative, got {j}")
    p = 2 * eval_T(j, t) - eval_U(j, t)
    q = eval_U(j - 1, t) if j >= 1 else 0 * t
    return p, q


@lru_cache(maxsize=None)
def cheb_coeffs(kind: str, k: int) -> IntPoly:
    """Integer coefficient vector of ``T_k`` (``kind="first"``) or ``U_k``."""
    if k < 0:
        raise ValueError(f"degree must be nonnegative, got {k}")
    if kind not in ("first", "second"):
        raise ValueError(f"kind must be 'first' or 'second', got {kind!r}")
    if k == 0:
        return IntPoly((1,))
    if k == 1:
        return IntPoly((0, 1)) if kind == "first" else IntPoly((0, 2))
    two_x = IntPoly((0, 2))
    return two_x * cheb_coeffs(kind, k - 1) - cheb_coeffs(kind, k - 2)

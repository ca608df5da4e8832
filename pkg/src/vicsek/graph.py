"""Level-m approximating graphs of the Vicsek set with exact integer geometry.

Points of ``V_m`` are stored at the global scale ``2 (2n-1)^m``: every cube
corner, cell corner and cell center is then an integer vector, so junction
points shared by two cells are identified by plain equality.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .decim import Params
from .errors import CapacityExceeded, EmptyInterior

__all__ = [
    "corner",
    "opposite",
    "letters",
    "apply_map",
    "VicsekGraph",
    "build_graph",
    "max_level",
    "apply_laplacian",
    "energy",
    "OperatorMatrix",
    "operator_matrix",
    "EigenFunction",
    "eigen_residual",
]

MAX_VERTICES = 2_000_000
_INT64_LIMIT = 2**62


def corner(params: Params, i: int) -> np.ndarray:
    """0/1 coordinates of ``q_i``, ``i = 1 + sum 2^(l-1) a_l``."""
    if not 1 <= i <= params.corners:
        raise ValueError(f"corner index {i} out of range 1..{params.corners}")
    return np.array([((i - 1) >> l) & 1 for l in range(params.d)], dtype=np.int64)


def opposite(params: Params, i: int) -> int:
    return params.corners + 1 - i


def letters(params: Params) -> list:
    """Cell alphabet: ``(i, j)`` for ``j < n`` and ``0`` for the center cell."""
    out: list = [(i, j) for i in range(1, params.corners + 1) for j in range(1, params.n)]
    out.append(0)
    return out


def _letter_offset(params: Params, letter) -> np.ndarray:
    # 2(n-j) q_i + (j-1) 1, the translation of F_letter in half-units
    if letter == 0:
        return np.full(params.d, params.n - 1, dtype=np.int64)
    i, j = letter
    if not (1 <= i <= params.corners and 1 <= j <= params.n):
        raise ValueError(f"invalid letter {letter!r}")
    return 2 * (params.n - j) * corner(params, i) + (j - 1)


def apply_map(params: Params, letter, point, scale_exponent: int):
    """Apply ``F_letter`` to an integer point given at scale ``2(2n-1)^k``.

    The image is returned at scale ``2(2n-1)^(k+1)``; letter ``0`` denotes
    the center cell ``F_{i,n}`` (independent of ``i``).
    """
    scale = 2 * (2 * params.n - 1) ** scale_exponent
    point = np.asarray(point)
    return point + scale * _letter_offset(params, letter).astype(point.dtype)


@lru_cache(maxsize=None)
def _unit_cells(params: Params) -> np.ndarray:
    """Corners of the level-1 cells at scale ``2(2n-1)``, shape (L, 2^d, d)."""
    base = np.stack([2 * corner(params, k) for k in range(1, params.corners + 1)])
    return np.stack([apply_map(params, a, base, 0) for a in letters(params)])


def max_level(params: Params) -> int:
    """Largest level allowed by the capacity policy.

    ``VICSEK_MAX_LEVEL`` overrides the default vertex-count bound.
    """
    env = os.environ.get("VICSEK_MAX_LEVEL")
    if env:
        return int(env)
    m = 0
    while params.vertex_count(m + 1) <= MAX_VERTICES:
        m += 1
    return m


def _encode(coords: np.ndarray, scale: int) -> np.ndarray:
    # lexicographic rank-preserving integer key
    base = scale + 1
    key = np.zeros(coords.shape[:-1], dtype=coords.dtype)
    for l in range(coords.shape[-1]):
        key = key * base + coords[..., l]
    return key


@dataclass(eq=False)
class VicsekGraph:
    """The graph ``G_m = (V_m, E_m)``.

    Attributes
    ----------
    coords : ndarray, shape (V, d)
        Integer coordinates at scale ``2(2n-1)^m``, lexicographically sorted.
    cells : ndarray, shape (C, 2^d)
        Vertex indices of each m-cell's corners, in corner order ``q_1..q_{2^d}``.
        Children of a cell at the next level are contiguous.
    edges : ndarray, shape (E, 2)
    degree, is_boundary : ndarray, shape (V,)
    """

    params: Params
    level: int
    coords: np.ndarray
    cells: np.ndarray
    edges: np.ndarray
    degree: np.ndarray
    is_boundary: np.ndarray
    _keys: np.ndarray = field(repr=False, default=None)

    @property
    def scale(self) -> int:
        return 2 * (2 * self.params.n - 1) ** self.level

    @property
    def num_vertices(self) -> int:
        return len(self.coords)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    @property
    def boundary(self) -> np.ndarray:
        """Boundary vertex indices in corner order ``q_1..q_{2^d}``."""
        return self.locate(
            np.stack([self.scale * corner(self.params, k) for k in range(1, self.params.corners + 1)])
        )

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        v = self.num_vertices
        e = self.edges
        data = np.ones(2 * len(e))
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return sp.csr_matrix((data, (rows, cols)), shape=(v, v))

    def locate(self, coords) -> np.ndarray:
        """Vertex indices of the given integer points; ``KeyError`` if absent."""
        coords = np.asarray(coords, dtype=self.coords.dtype)
        keys = _encode(coords, self.scale)
        pos = np.searchsorted(self._keys, keys)
        pos = np.clip(pos, 0, len(self._keys) - 1)
        if np.any(self._keys[pos] != keys):
            raise KeyError("point not in vertex set")
        return pos

    def cell_word(self, c: int) -> tuple:
        """Address ``w_1 ... w_m`` of cell ``c``."""
        alphabet = letters(self.params)
        base = len(alphabet)
        word = []
        for _ in range(self.level):
            c, r = divmod(c, base)
            word.append(alphabet[r])
        return tuple(reversed(word))


def build_graph(params: Params, m: int) -> VicsekGraph:
    """Construct ``G_m`` by refining every cell into its ``2^d n - 2^d + 1`` children."""
    if m < 0:
        raise ValueError(f"level must be nonnegative, got {m}")
    limit = max_level(params)
    scale = 2 * (2 * params.n - 1) ** m
    if m > limit:
        raise CapacityExceeded(
            f"level {m} exceeds capacity bound {limit} for d={params.d}, n={params.n} "
            "(set VICSEK_MAX_LEVEL to override)"
        )
    if (scale + 1) ** params.d >= _INT64_LIMIT:
        raise CapacityExceeded(f"coordinates at level {m} overflow 64-bit keys")

    k = params.corners
    cells = np.stack([2 * corner(params, i) for i in range(1, k + 1)])[None]
    unit = _unit_cells(params)
    ratio = 2 * params.n - 1
    for _ in range(m):
        origins = ratio * cells[:, 0, :]
        cells = (origins[:, None, None, :] + unit[None]).reshape(-1, k, params.d)

    flat = cells.reshape(-1, params.d)
    coords, inverse = np.unique(flat, axis=0, return_inverse=True)
    cell_idx = inverse.reshape(-1, k)

    iu, ju = np.triu_indices(k, 1)
    edges = np.stack([cell_idx[:, iu].ravel(), cell_idx[:, ju].ravel()], axis=1)
    degree = np.bincount(edges.ravel(), minlength=len(coords))
    is_boundary = np.all((coords == 0) | (coords == scale), axis=1)
    return VicsekGraph(
        params, m, coords, cell_idx, edges, degree, is_boundary, _encode(coords, scale)
    )


def _check_len(graph: VicsekGraph, f) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (graph.num_vertices,):
        raise ValueError(f"expected {graph.num_vertices} values, got shape {f.shape}")
    return f


def apply_laplacian(graph: VicsekGraph, f) -> np.ndarray:
    """``-Δ_m f`` at every vertex, boundary included."""
    f = _check_len(graph, f)
    return f - (graph.adjacency @ f) / graph.degree


def energy(graph: VicsekGraph, f) -> float:
    """Renormalized graph energy, each edge counted once."""
    f = _check_len(graph, f)
    diff = f[graph.edges[:, 0]] - f[graph.edges[:, 1]]
    return (2 * graph.params.n - 1) ** graph.level * float(np.dot(diff, diff))


class OperatorMatrix(NamedTuple):
    matrix: np.ndarray
    index: np.ndarray  # row r of matrix corresponds to vertex index[r]
    mode: str


def operator_matrix(graph: VicsekGraph, mode: str = "neumann") -> OperatorMatrix:
    """Symmetrized ``I - D^{-1/2} A D^{-1/2}``, restricted to the interior for Dirichlet."""
    if mode not in ("neumann", "dirichlet"):
        raise ValueError(f"mode must be 'neumann' or 'dirichlet', got {mode!r}")
    if mode == "dirichlet":
        if graph.level == 0:
            raise EmptyInterior("Dirichlet problem at level 0 has no interior vertices")
        index = graph.interior
    else:
        index = np.arange(graph.num_vertices)
    adj = graph.adjacency[index][:, index].toarray()
    deg = graph.degree[index].astype(float)
    # 1/sqrt(d_i d_j) is symmetric bit-for-bit
    mat = -adj / np.sqrt(np.multiply.outer(deg, deg))
    mat[np.diag_indices_from(mat)] = 1.0
    return OperatorMatrix(mat, index, mode)


@dataclass
class EigenFunction:
    graph: VicsekGraph
    values: np.ndarray
    eigenvalue: float

    def __post_init__(self):
        self.values = _check_len(self.graph, self.values)


def eigen_residual(graph: VicsekGraph, f, lam: float, mode: str = "neumann") -> float:
    """Max of ``|(-Δ f)(x) - λ f(x)|`` over the vertices where the equation is imposed."""
    r = apply_laplacian(graph, f) - lam * np.asarray(f, dtype=float)
    if mode == "dirichlet":
        r = r[~graph.is_boundary]
    elif mode != "neumann":
        raise ValueError(f"mode must be 'neumann' or 'dirichlet', got {mode!r}")
    return float(np.max(np.abs(r))) if r.size else 0.0

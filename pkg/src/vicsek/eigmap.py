"""Moving eigenfunctions between consecutive levels.

``extend_eigenfunction`` lifts an eigenfunction of ``-Δ_m`` with eigenvalue
``R(λ)`` to an eigenfunction of ``-Δ_{m+1}`` with eigenvalue ``λ`` by solving
the same small linear system inside every m-cell.  ``restrict_check`` goes
the other way and measures how well the restriction satisfies the coarse
equation.  The closed-form arm kernels (three-term recurrence, side values,
cell traces) are exposed so the local algebra can be checked on solved cells.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .cheb import eval_PQ
from .decim import Params, distance_to_forbidden, eval_R, is_forbidden
from .errors import (
    ForbiddenEigenvalue,
    NearForbidden,
    NotAnEigenfunction,
    SingularSystem,
    TopValueExcluded,
)
from .graph import (
    EigenFunction,
    VicsekGraph,
    apply_laplacian,
    build_graph,
    corner,
    eigen_residual,
)

__all__ = [
    "CellTrace",
    "RestrictionReport",
    "arm_propagate",
    "arm_closed_form",
    "side_values",
    "local_system",
    "local_min_singular_value",
    "extend_eigenfunction",
    "restrict",
    "restrict_check",
    "cell_trace",
]

NEAR_FORBIDDEN = 1e-7
PRE_TOL = 1e-8
RESTRICT_TOL = 1e-7


def arm_propagate(t: float, j1: float, j2: float, j: int) -> float:
    """Value ``J_j`` along an arm from ``J_1``, ``J_2`` and ``J_k = 2t J_{k-1} - J_{k-2}``."""
    if j < 1:
        raise ValueError(f"arm index must be >= 1, got {j}")
    if j == 1:
        return j1
    prev, cur = j1, j2
    for _ in range(j - 2):
        prev, cur = cur, 2 * t * cur - prev
    return cur


def arm_closed_form(t: float, j1: float, j2: float, j: int) -> float:
    """Same as :func:`arm_propagate` through ``P_{j-1}(t) J_1 + Q_{j-1}(t) J_2``."""
    p, q = eval_PQ(j - 1, t)
    return p * j1 + q * j2


def side_values(t: float, j_left: float, j_right: float) -> float:
    """Common value of the side vertices of a sub-cell between two arm points.

    The closed form divides by ``1 + t = 2 - Nλ``; at ``t = -1`` it breaks
    down even though the cell system itself stays regular there.
    """
    if abs(1 + t) <= 1e-12:
        raise TopValueExcluded("side value formula is singular at t = -1 (lambda = 2/N)")
    return (j_left + j_right) / (1 + t)


@lru_cache(maxsize=None)
def _template(params: Params):
    g1 = build_graph(params, 1)
    interior = g1.interior
    bnd = g1.boundary
    adj = g1.adjacency
    a_ii = adj[interior][:, interior].toarray()
    a_ib = adj[interior][:, bnd].toarray()
    deg = g1.degree[interior].astype(float)
    return g1, interior, bnd, a_ii, a_ib, deg


def local_system(params: Params, lam: float) -> np.ndarray:
    """Interior matrix ``(1-λ) D - A`` of a single cell with fixed corners."""
    _, _, _, a_ii, _, deg = _template(params)
    return (1 - lam) * np.diag(deg) - a_ii


def local_min_singular_value(params: Params, lam: float) -> float:
    """Smallest singular value of the zero-boundary cell system, symmetrically scaled."""
    _, _, _, a_ii, _, deg = _template(params)
    s = 1 / np.sqrt(deg)
    mat = (1 - lam) * np.eye(len(deg)) - s[:, None] * a_ii * s[None, :]
    return float(la.svdvals(mat).min())


def _scale_of(values: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0


def _embed(coarse: VicsekGraph, fine: VicsekGraph) -> np.ndarray:
    """Index in ``fine`` of every vertex of ``coarse``."""
    if fine.params != coarse.params or fine.level != coarse.level + 1:
        raise ValueError("graphs must be consecutive levels of the same Vicsek set")
    ratio = 2 * coarse.params.n - 1
    return fine.locate(ratio * coarse.coords)


def _cell_points(coarse: VicsekGraph, fine: VicsekGraph, local: np.ndarray) -> np.ndarray:
    # local points at scale 2(2n-1) inside every coarse cell -> fine indices
    ratio = 2 * coarse.params.n - 1
    origins = ratio * coarse.coords[coarse.cells[:, 0]]
    pts = origins[:, None, :] + np.asarray(local, dtype=coarse.coords.dtype)[None]
    return fine.locate(pts)


def extend_eigenfunction(
    coarse: VicsekGraph,
    fine: VicsekGraph,
    f,
    lam: float,
    mode: str = "neumann",
) -> EigenFunction:
    """Extend ``f`` (eigenvalue ``R(λ)`` on ``coarse``) to an eigenfunction on ``fine``.

    Raises
    ------
    ForbiddenEigenvalue
        ``λ`` is a forbidden eigenvalue, where the cell system is degenerate.
    NearForbidden
        ``λ`` lies within ``1e-7`` of a forbidden eigenvalue.
    NotAnEigenfunction
        ``f`` does not satisfy the coarse equation with eigenvalue ``R(λ)``.
    """
    params = coarse.params
    if is_forbidden(params, lam):
        raise ForbiddenEigenvalue(f"lambda = {lam!r} is a forbidden eigenvalue")
    dist = distance_to_forbidden(params, lam)
    if dist < NEAR_FORBIDDEN:
        raise NearForbidden(f"lambda = {lam!r} is {dist:.2e} from a forbidden eigenvalue")

    f = np.asarray(f, dtype=float)
    if f.shape != (coarse.num_vertices,):
        raise ValueError(f"expected {coarse.num_vertices} values, got shape {f.shape}")
    lam_coarse = float(eval_R(params, lam))
    scale = _scale_of(f)
    if eigen_residual(coarse, f, lam_coarse, mode) > PRE_TOL * scale:
        raise NotAnEigenfunction(f"input is not an eigenfunction with eigenvalue R(lambda) = {lam_coarse!r}")
    if mode == "dirichlet" and np.max(np.abs(f[coarse.is_boundary])) > PRE_TOL * scale:
        raise NotAnEigenfunction("Dirichlet input must vanish on the boundary")

    g1, interior, bnd, a_ii, a_ib, deg = _template(params)
    mat = local_system(params, lam)
    if local_min_singular_value(params, lam) < 1e-12:
        raise SingularSystem(f"cell system is numerically singular at lambda = {lam!r}")
    boundary_vals = f[coarse.cells]  # (C, 2^d) in corner order
    sol = la.solve(mat, a_ib @ boundary_vals.T, assume_a="sym")  # (n_int, C)

    out = np.empty(fine.num_vertices)
    out[_embed(coarse, fine)] = f
    idx = _cell_points(coarse, fine, g1.coords[interior])  # (C, n_int)
    out[idx] = sol.T
    return EigenFunction(fine, out, lam)


def restrict(coarse: VicsekGraph, fine: VicsekGraph, f) -> np.ndarray:
    return np.asarray(f, dtype=float)[_embed(coarse, fine)]


@dataclass
class RestrictionReport:
    residual: float
    eigenvalue: float
    passed: bool
    values: np.ndarray


def restrict_check(
    coarse: VicsekGraph,
    fine: VicsekGraph,
    f,
    lam: float,
    mode: str = "neumann",
    tol: float = RESTRICT_TOL,
) -> RestrictionReport:
    """Restrict a fine eigenfunction and measure the coarse residual against ``R(λ)``."""
    params = coarse.params
    if abs(lam - float(params.top_value)) <= 1e-12:
        raise TopValueExcluded("restriction is not defined at the top value")
    f = np.asarray(f, dtype=float)
    scale = _scale_of(f)
    if eigen_residual(fine, f, lam, mode) > PRE_TOL * scale:
        raise NotAnEigenfunction(f"input is not an eigenfunction with eigenvalue {lam!r}")
    g = restrict(coarse, fine, f)
    mu = float(eval_R(params, lam))
    res = eigen_residual(coarse, g, mu, mode)
    return RestrictionReport(res, mu, res <= tol * scale, g)


@dataclass
class CellTrace:
    """Values of a fine eigenfunction along the arms of one coarse cell.

    ``J[i-1, j-1] = f(F_w p_{i,j})`` for ``j = 1..n`` plus the ghost value at
    ``j = n+1``.  ``L[i-1, j-1, k-1] = f(F_w F_{i,j} q_k)`` for ``j < n`` and
    ``k`` different from ``i`` and its opposite corner; other slots are NaN.
    """

    J: np.ndarray
    L: np.ndarray
    t: float


def cell_trace(coarse: VicsekGraph, fine: VicsekGraph, cell: int, f, lam: float) -> CellTrace:
    params = coarse.params
    n, k = params.n, params.corners
    t = 1 - params.N * lam
    f = np.asarray(f, dtype=float)
    ratio = 2 * n - 1
    origin = ratio * coarse.coords[coarse.cells[cell, 0]]
    one = np.ones(params.d, dtype=np.int64)

    J = np.empty((k, n + 1))
    L = np.full((k, n - 1, k), np.nan)
    for i in range(1, k + 1):
        qi = corner(params, i)
        for j in range(1, n + 1):
            p = 2 * ((2 * n - 2 * j + 1) * qi + (j - 1) * one)
            J[i - 1, j - 1] = f[fine.locate(origin + p)]
        J[i - 1, n] = 2 * t * J[i - 1, n - 1] - J[i - 1, n - 2]
        for j in range(1, n):
            for kk in range(1, k + 1):
                if kk in (i, k + 1 - i):
                    continue
                p = 2 * (corner(params, kk) + 2 * (n - j) * qi + (j - 1) * one)
                L[i - 1, j - 1, kk - 1] = f[fine.locate(origin + p)]
    return CellTrace(J, L, t)

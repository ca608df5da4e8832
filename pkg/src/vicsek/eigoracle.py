"""Brute-force dense eigensolver used as an independent check on decimation."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import NotSymmetric

__all__ = [
    "DenseSpectrum",
    "ClusterGapWarning",
    "dense_spectrum",
    "cluster_multiplicities",
    "min_cluster_gap",
    "SpectrumComparison",
    "compare_spectra",
]

CLUSTER_TOL = 1e-6


class ClusterGapWarning(UserWarning):
    """Adjacent clusters are closer than ten times the clustering tolerance."""


@dataclass
class DenseSpectrum:
    values: np.ndarray
    dimension: int
    vectors: np.ndarray | None = None


def dense_spectrum(matrix, vectors: bool = False, sym_tol: float = 1e-12) -> DenseSpectrum:
    """All eigenvalues of a real symmetric matrix, ascending."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.T)) > sym_tol:
        raise NotSymmetric("matrix is not symmetric within tolerance")
    if a.shape[0] == 0:
        return DenseSpectrum(np.empty(0), 0, np.empty((0, 0)) if vectors else None)
    if vectors:
        w, v = la.eigh(a)
        return DenseSpectrum(w, a.shape[0], v)
    return DenseSpectrum(la.eigvalsh(a), a.shape[0])


def cluster_multiplicities(values, tol: float = CLUSTER_TOL, check_gap: bool = True):
    """Merge consecutive ascending values closer than ``tol``.

    Returns a list of ``(mean, count)`` pairs.  With ``check_gap`` a
    :class:`ClusterGapWarning` is issued when two clusters are separated by
    less than ``10 * tol``, since the multiplicities are then unreliable.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    if np.any(np.diff(values) < 0):
        raise ValueError("values must be sorted ascending")
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    groups = np.split(values, breaks)
    clusters = [(float(g.mean()), len(g)) for g in groups]
    if check_gap:
        gap = min_cluster_gap(clusters)
        if gap <= 10 * tol:
            warnings.warn(
                f"smallest gap between clusters {gap:.3e} is within 10x tol={tol:g}",
                ClusterGapWarning,
                stacklevel=2,
            )
    return clusters


def min_cluster_gap(clusters) -> float:
    if len(clusters) < 2:
        return float("inf")
    vals = np.array([c[0] for c in clusters])
    return float(np.min(np.diff(vals)))


@dataclass
class SpectrumComparison:
    max_deviation: float
    multiplicities_equal: bool
    n_reference: int
    n_candidate: int
    atol: float

    @property
    def passed(self) -> bool:
        return self.multiplicities_equal and self.max_deviation <= self.atol


def compare_spectra(reference, candidate, atol: float = 1e-8) -> SpectrumComparison:
    """Compare two lists of ``(value, multiplicity)`` pairs entry by entry."""
    reference = list(reference)
    candidate = list(candidate)
    same_len = len(reference) == len(candidate)
    if not same_len:
        return SpectrumComparison(float("inf"), False, len(reference), len(candidate), atol)
    dev = max((abs(a[0] - b[0]) for a, b in zip(reference, candidate)), default=0.0)
    mults = all(a[1] == b[1] for a, b in zip(reference, candidate))
    return SpectrumComparison(dev, mults, len(reference), len(candidate), atol)

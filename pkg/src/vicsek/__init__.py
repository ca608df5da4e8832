"""Spectral decimation, dense spectra and lattice isomorphism for Vicsek set graphs."""
from .decim import (
    Params,
    dirichlet_spectrum,
    eval_R,
    forbidden_set,
    inverse_branches,
    neumann_spectrum,
    r_coeffs,
)
from .eigmap import extend_eigenfunction, restrict_check
from .eigoracle import cluster_multiplicities, dense_spectrum
from .graph import build_graph, operator_matrix
from .lattice import OmegaSeq, gamma_oracle_iso, iso_decide_periodic, parse_omega, thm56_check

__version__ = "0.1.0"

__all__ = [
    "Params",
    "build_graph",
    "operator_matrix",
    "r_coeffs",
    "eval_R",
    "forbidden_set",
    "inverse_branches",
    "neumann_spectrum",
    "dirichlet_spectrum",
    "dense_spectrum",
    "cluster_multiplicities",
    "extend_eigenfunction",
    "restrict_check",
    "OmegaSeq",
    "parse_omega",
    "thm56_check",
    "gamma_oracle_iso",
    "iso_decide_periodic",
]

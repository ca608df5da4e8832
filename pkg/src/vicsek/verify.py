"""Desk-scale property suites shared by the command line and the test-suite."""
from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cheb import eval_T, eval_U
from .decim import (
    Params,
    dirichlet_spectrum,
    eval_A,
    eval_R,
    eval_S,
    forbidden_set,
    inverse_branches,
    is_forbidden,
    neumann_spectrum,
)
from .eigmap import extend_eigenfunction, local_min_singular_value, restrict_check
from .eigoracle import cluster_multiplicities, compare_spectra, dense_spectrum
from .errors import ForbiddenEigenvalue
from .graph import build_graph, eigen_residual, operator_matrix
from .lattice import gamma_oracle_iso, random_omega_pair, thm56_check

__all__ = [
    "Check",
    "IDENTITY_GRID",
    "SPECTRA_SUITE",
    "EIGENMAP_GRID",
    "LATTICE_GRID",
    "identity_checks",
    "spectra_checks",
    "oracle_comparison",
    "eigenmap_checks",
    "lattice_checks",
    "run_suite",
]

IDENTITY_GRID = [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (4, 2)]
SPECTRA_SUITE = [(2, 2, 1), (2, 2, 2), (2, 2, 3), (2, 3, 1), (2, 3, 2), (3, 2, 1), (3, 2, 2)]
EIGENMAP_GRID = [(2, 2), (2, 3)]
LATTICE_GRID = [(2, 2), (2, 3), (3, 2)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  {self.detail}" if self.detail else "")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(threads) as pool:
        return list(pool.map(fn, items))


# -- polynomial identities ---------------------------------------------------


def identity_checks(params: Params, samples: int = 10_000, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    top = float(params.top_value)
    lam = rng.uniform(0, top, samples)
    t = 1 - params.N * lam
    n, N = params.n, params.N
    r = eval_R(params, lam)
    u1, u2 = eval_U(n - 1, t), eval_U(n - 2, t)
    res_a = np.max(np.abs(r - lam * eval_A(params, lam) * (u1 + N * u2)) / (1 + np.abs(r)))
    res_b = np.max(
        np.abs(N * r - params.corners - eval_S(params, lam) * (u2 - u1)) / (1 + np.abs(N * r))
    )
    tag = f"d={params.d} n={n}"
    out = [
        Check(f"factorization through A and U_(n-1)+N U_(n-2) [{tag}]", res_a <= 1e-9, f"residual={res_a:.2e}"),
        Check(f"factorization through S and U_(n-2)-U_(n-1) [{tag}]", res_b <= 1e-9, f"residual={res_b:.2e}"),
    ]
    fs = forbidden_set(params)
    s_res = max(abs(float(eval_S(params, a))) for a in fs.alphas)
    a_res = max(abs(float(eval_A(params, b))) for b in fs.betas)
    distinct = len(set(np.round(fs.values(), 12))) == len(fs)
    out.append(
        Check(
            f"forbidden set [{tag}]",
            len(fs) == 2 * n and distinct and s_res <= 1e-10 and a_res <= 1e-10,
            f"size={len(fs)} |S|<={s_res:.1e} |A|<={a_res:.1e}",
        )
    )
    grid = np.linspace(0, top, 100)
    worst = 0.0
    for y in grid:
        worst = max(worst, max(abs(float(eval_R(params, x)) - y) for x in inverse_branches(params, y)))
    out.append(Check(f"inverse branches land on target [{tag}]", worst <= 1e-10, f"residual={worst:.2e}"))
    inner = grid[1:-1]
    hits = sum(is_forbidden(params, x) for y in inner for x in inverse_branches(params, y))
    out.append(Check(f"inverse branches avoid forbidden set [{tag}]", hits == 0, f"hits={hits}"))
    tt = rng.uniform(-1, 1, 1000)
    pell = max(
        float(np.max(np.abs(1 - eval_U(k, tt) ** 2 + eval_U(k - 1, tt) * eval_U(k + 1, tt))))
        for k in range(1, 31)
    )
    cosine = max(
        float(np.max(np.abs(eval_T(k, tt) - np.cos(k * np.arccos(tt))))) for k in range(31)
    )
    out.append(Check("Chebyshev Pell identity", pell <= 1e-9, f"residual={pell:.2e}"))
    out.append(Check("Chebyshev cosine form", cosine <= 1e-10, f"residual={cosine:.2e}"))
    return out


# -- spectra -------------------------------------------------------------------


def _spectrum(params: Params, m: int, mode: str):
    return neumann_spectrum(params, m) if mode == "neumann" else dirichlet_spectrum(params, m)


def oracle_comparison(params: Params, m: int, mode: str, atol: float = 1e-8, tol: float = 1e-6):
    """Decimation spectrum, clustered dense spectrum and their comparison."""
    spec = _spectrum(params, m, mode)
    g = build_graph(params, m)
    dense = dense_spectrum(operator_matrix(g, mode).matrix)
    clusters = cluster_multiplicities(dense.values, tol)
    return spec, clusters, compare_spectra(spec.as_pairs(), clusters, atol)


def spectra_checks(suite=SPECTRA_SUITE, threads: int = 1) -> list[Check]:
    jobs = [(d, n, m, mode) for d, n, m in suite for mode in ("neumann", "dirichlet")]

    def one(job):
        d, n, m, mode = job
        params = Params(d, n)
        start = time.perf_counter()
        spec, _, cmp = oracle_comparison(params, m, mode)
        elapsed = time.perf_counter() - start
        dim = params.vertex_count(m) - (params.corners if mode == "dirichlet" else 0)
        tag = f"d={d} n={n} m={m} {mode}"
        return [
            Check(
                f"oracle equivalence [{tag}]",
                cmp.passed,
                f"entries={cmp.n_reference} max_dev={cmp.max_deviation:.1e} "
                f"mult_equal={cmp.multiplicities_equal} time={elapsed:.2f}s",
            ),
            Check(
                f"total multiplicity [{tag}]",
                spec.total_multiplicity == dim,
                f"{spec.total_multiplicity} vs {dim}",
            ),
            Check(
                f"trace [{tag}]",
                abs(spec.trace() - dim) <= 1e-6 * dim,
                f"{spec.trace():.10g} vs {dim}",
            ),
        ]

    return [c for group in _pmap(one, jobs, threads) for c in group]


# -- eigenfunction maps ----------------------------------------------------------


def _level_eigenpairs(graph, mode):
    op = operator_matrix(graph, mode)
    ds = dense_spectrum(op.matrix, vectors=True)
    out = []
    for value, count in cluster_multiplicities(ds.values, check_gap=False):
        k = int(np.argmin(np.abs(ds.values - value)))
        f = np.zeros(graph.num_vertices)
        f[op.index] = ds.vectors[:, k] / np.sqrt(graph.degree[op.index])
        out.append((value, f))
    return out


def eigenmap_checks(grid=EIGENMAP_GRID, max_level: int = 2) -> list[Check]:
    out = []
    for d, n in grid:
        params = Params(d, n)
        fs = forbidden_set(params)
        for m in range(max_level + 1):
            coarse, fine = build_graph(params, m), build_graph(params, m + 1)
            for mode in ("neumann", "dirichlet"):
                if mode == "dirichlet" and m == 0:
                    continue
                ext_worst = res_worst = 0.0
                count = 0
                for mu, f in _level_eigenpairs(coarse, mode):
                    for lam in inverse_branches(params, min(max(mu, 0.0), float(params.top_value))):
                        if is_forbidden(params, lam):
                            continue
                        ef = extend_eigenfunction(coarse, fine, f, lam, mode)
                        ext_worst = max(ext_worst, eigen_residual(fine, ef.values, lam, mode))
                        rep = restrict_check(coarse, fine, ef.values, lam, mode)
                        res_worst = max(res_worst, rep.residual)
                        count += 1
                tag = f"d={d} n={n} m={m}->{m + 1} {mode}"
                out.append(
                    Check(
                        f"extend/restrict round trip [{tag}]",
                        count > 0 and ext_worst <= 1e-8 and res_worst <= 1e-7,
                        f"pairs={count} extend={ext_worst:.1e} restrict={res_worst:.1e}",
                    )
                )
        coarse, fine = build_graph(params, 0), build_graph(params, 1)
        raised = 0
        for lam in fs.values():
            try:
                extend_eigenfunction(coarse, fine, np.ones(coarse.num_vertices), lam)
            except ForbiddenEigenvalue:
                raised += 1
        out.append(
            Check(f"forbidden values refused [d={d} n={n}]", raised == len(fs), f"{raised}/{len(fs)}")
        )
        at = max(local_min_singular_value(params, lam) for lam in fs.values())
        probe = np.linspace(0.013, float(params.top_value) - 0.013, 200)
        away = min(
            local_min_singular_value(params, x)
            for x in probe
            if min(abs(x - v) for v in fs.values()) > 1e-3
        )
        out.append(
            Check(
                f"local system degenerates exactly on forbidden set [d={d} n={n}]",
                at <= 1e-8 and away >= 1e-6,
                f"on={at:.1e} off>={away:.1e}",
            )
        )
    return out


# -- lattices --------------------------------------------------------------------


def lattice_checks(
    grid=LATTICE_GRID, pairs: int = 200, horizon: int = 8, seed: int = 0, threads: int = 1
) -> list[Check]:
    def one(dn):
        params = Params(*dn)
        rng = random.Random(f"{seed}-{dn}")
        agree = iso = 0
        for _ in range(pairs):
            w, w2 = random_omega_pair(params, rng)
            M = rng.randint(1, min(3, horizon))
            a = thm56_check(params, w, w2, M, horizon)
            b = gamma_oracle_iso(params, w, w2, M, horizon)
            agree += a == b
            iso += a
        pct = 100.0 * agree / pairs if pairs else 100.0
        return Check(
            f"letter conditions vs center-distance oracle [d={dn[0]} n={dn[1]} h={horizon}]",
            agree == pairs,
            f"agreement={agree}/{pairs} ({pct:.1f}%) isomorphic={iso}",
        )

    return _pmap(one, list(grid), threads)


def run_suite(name: str, **kw) -> list[Check]:
    threads = kw.get("threads", 1)
    if name == "identities":
        grid = [kw["dn"]] if kw.get("dn") else IDENTITY_GRID
        return [c for dn in grid for c in identity_checks(Params(*dn), seed=kw.get("seed", 0))]
    if name == "spectra":
        return spectra_checks(threads=threads)
    if name == "eigenmaps":
        grid = [kw["dn"]] if kw.get("dn") else EIGENMAP_GRID
        return eigenmap_checks(grid)
    if name == "lattice":
        grid = [kw["dn"]] if kw.get("dn") else LATTICE_GRID
        return lattice_checks(
            grid, kw.get("pairs", 200), kw.get("horizon", 8), kw.get("seed", 0), threads
        )
    if name == "all":
        return [c for s in ("identities", "spectra", "eigenmaps", "lattice") for c in run_suite(s, **kw)]
    raise ValueError(f"unknown suite {name!r}")

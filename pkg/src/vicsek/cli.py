"""Command line front end: ``vicsek {spectrum,graph,extend,verify,lattice}``.

Exit codes: 0 ok, 1 usage error, 2 comparison mismatch, 3 numeric failure,
4 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .decim import Params, dirichlet_spectrum, eval_R, neumann_spectrum
from .eigmap import extend_eigenfunction
from .eigoracle import CLUSTER_TOL, cluster_multiplicities, compare_spectra, dense_spectrum
from .errors import (
    CapacityExceeded,
    EmptyInterior,
    ForbiddenEigenvalue,
    InconclusiveBound,
    InvalidParams,
    NearForbidden,
    NotAnEigenfunction,
    OmegaParseError,
    RootCountMismatch,
    SingularSystem,
)
from .graph import build_graph, eigen_residual, operator_matrix
from .lattice import (
    build_blowup_tree,
    center_matrix,
    gamma_oracle_iso,
    iso_decide_periodic,
    parse_omega,
)
from .verify import run_suite

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_NUMERIC, EXIT_VERIFY = range(5)
RESIDUAL_TOL = 1e-8
EXACT_TOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- formatting ---------------------------------------------------------------


def fmt_float(x: float) -> float:
    """Round to 15 significant digits so output is stable across platforms."""
    return float(f"{float(x):.15g}")


def fmt_value(x: float) -> float:
    # snap to the exact rational when there is one, so solver noise never shows
    label = exact_label(x)
    return fmt_float(Fraction(label) if label is not None else x)


def exact_label(x: float) -> str | None:
    """``"p/q"`` (or ``"p"``) when ``x`` is a small-denominator rational."""
    q = Fraction(float(x)).limit_denominator(1000)
    if abs(float(q) - x) > EXACT_TOL:
        return None
    return str(q)


def _dump_json(obj, out):
    json.dump(obj, out, indent=2, sort_keys=False)
    out.write("\n")


def _parse_real(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a real number: {text!r}") from None


# -- spectrum -------------------------------------------------------------------


def _spectrum_payload(args, params):
    mode = args.mode
    payload = {
        "command": "spectrum",
        "d": params.d,
        "n": params.n,
        "m": args.m,
        "mode": mode,
        "method": args.method,
    }
    dim = params.vertex_count(args.m) - (params.corners if mode == "dirichlet" else 0)
    if mode == "dirichlet" and args.m == 0:
        dim = 0
    payload["dimension"] = dim
    payload["entries"] = None
    status = EXIT_OK
    entries = None
    if args.method in ("decimation", "both"):
        spec = neumann_spectrum(params, args.m) if mode == "neumann" else dirichlet_spectrum(params, args.m)
        entries = [
            {
                "value": fmt_value(e.value),
                "exact": exact_label(e.value),
                "multiplicity": e.multiplicity,
                "seed": e.genealogy.label,
                "word": e.genealogy.word_str,
            }
            for e in spec
        ]
    clusters = None
    if args.method in ("dense", "both"):
        if dim == 0:
            clusters = []
        else:
            g = build_graph(params, args.m)
            values = dense_spectrum(operator_matrix(g, mode).matrix).values
            clusters = cluster_multiplicities(values, args.cluster_tol)
        dense_entries = [
            {"value": fmt_value(v), "exact": exact_label(v), "multiplicity": k, "seed": None, "word": None}
            for v, k in clusters
        ]
        if entries is None:
            entries = dense_entries
        else:
            payload["dense"] = dense_entries
    payload["entries"] = entries
    if args.method == "both":
        cmp = compare_spectra(spec.as_pairs(), clusters, args.atol)
        payload["comparison"] = {
            "max_deviation": fmt_float(cmp.max_deviation) if math.isfinite(cmp.max_deviation) else None,
            "multiplicities_equal": cmp.multiplicities_equal,
            "atol": args.atol,
            "passed": cmp.passed,
        }
        if not cmp.passed:
            status = EXIT_MISMATCH
    return payload, status


def cmd_spectrum(args, out) -> int:
    params = Params(args.d, args.n)
    payload, status = _spectrum_payload(args, params)
    if args.format == "json":
        _dump_json(payload, out)
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["value", "multiplicity", "seed", "word"])
        for e in payload["entries"]:
            w.writerow([repr(e["value"]), e["multiplicity"], e["seed"] or "", e["word"] or ""])
        if "comparison" in payload:
            c = payload["comparison"]
            print(
                f"comparison: max_deviation={c['max_deviation']} "
                f"multiplicities_equal={c['multiplicities_equal']} passed={c['passed']}",
                file=sys.stderr,
            )
    return status


# -- graph and eigenfunctions ------------------------------------------------------


def cmd_graph(args, out) -> int:
    params = Params(args.d, args.n)
    g = build_graph(params, args.m)
    if args.format == "json":
        _dump_json(
            {
                "command": "graph",
                "d": params.d,
                "n": params.n,
                "m": args.m,
                "scale": g.scale,
                "vertices": g.coords.tolist(),
                "edges": g.edges.tolist(),
                "degree": g.degree.tolist(),
                "boundary": g.boundary.tolist(),
            },
            out,
        )
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["source", "target"])
        w.writerows(g.edges.tolist())
    return EXIT_OK


def _coarse_eigenfunction(coarse, mode, mu, tol):
    op = operator_matrix(coarse, mode)
    ds = dense_spectrum(op.matrix, vectors=True)
    k = int(np.argmin(np.abs(ds.values - mu)))
    if abs(ds.values[k] - mu) > tol:
        raise NotAnEigenfunction(f"R(lambda) = {mu!r} is not an eigenvalue at level {coarse.level}")
    f = np.zeros(coarse.num_vertices)
    f[op.index] = ds.vectors[:, k] / np.sqrt(coarse.degree[op.index])
    # fix sign and scale by the largest-magnitude entry
    f /= f[np.argmax(np.abs(f))]
    return f


def cmd_extend(args, out) -> int:
    params = Params(args.d, args.n)
    lam = _parse_real(args.lam)
    coarse, fine = build_graph(params, args.m), build_graph(params, args.m + 1)
    mu = float(eval_R(params, lam))
    if args.input:
        try:
            with open(args.input) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read --input: {exc}") from exc
        # a bare list or {"values": [...]}
        values = data.get("values") if isinstance(data, dict) else data
        try:
            f = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as exc:
            raise UsageError("--input must hold a list of numbers or an object with 'values'") from exc
        if f.ndim != 1:
            raise UsageError("--input must hold a list of numbers or an object with 'values'")
    else:
        f = _coarse_eigenfunction(coarse, args.mode, mu, 1e-6)
    ef = extend_eigenfunction(coarse, fine, f, lam, args.mode)
    res = eigen_residual(fine, ef.values, lam, args.mode)
    _dump_json(
        {
            "command": "extend",
            "d": params.d,
            "n": params.n,
            "m": args.m + 1,
            "mode": args.mode,
            "eigenvalue": fmt_float(lam),
            "coarse_eigenvalue": fmt_float(mu),
            "residual": fmt_float(res),
            "values": [fmt_float(v) for v in ef.values],
        },
        out,
    )
    return EXIT_OK if res <= args.residual_tol else EXIT_NUMERIC


# -- verification ------------------------------------------------------------------


def cmd_verify(args, out) -> int:
    dn = None
    if args.d is not None or args.n is not None:
        if args.d is None or args.n is None:
            raise UsageError("--d and --n must be given together")
        dn = (args.d, args.n)
        Params(*dn)
    checks = run_suite(
        args.suite, dn=dn, pairs=args.pairs, horizon=args.horizon, seed=args.seed, threads=args.threads
    )
    for c in checks:
        out.write(c.line() + "\n")
    failed = sum(not c.passed for c in checks)
    out.write(f"{len(checks) - failed}/{len(checks)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


# -- lattices ---------------------------------------------------------------------


def _omega(text, params, flag):
    try:
        return parse_omega(text, params)
    except OmegaParseError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _oracle_decide(params, omega, omega_prime, bound):
    start = max(len(omega.prefix), len(omega_prime.prefix))
    period = math.lcm(len(omega.cycle), len(omega_prime.cycle))
    for M in range(1, bound + 1):
        if gamma_oracle_iso(params, omega, omega_prime, M, max(M, start) + 3 * period + 1):
            return True, M
    return False, None


def cmd_lattice(args, out) -> int:
    params = Params(args.d, args.n)
    omega = _omega(args.omega, params, "--omega")
    if args.action == "iso":
        omega_prime = _omega(args.omega_prime, params, "--omega-prime")
        payload = {"command": "lattice iso", "d": params.d, "n": params.n,
                   "omega": str(omega), "omega_prime": str(omega_prime), "method": args.method}
        status = EXIT_OK
        verdicts = {}
        if args.method in ("thm56", "both"):
            try:
                verdicts["thm56"] = iso_decide_periodic(params, omega, omega_prime, args.bound)
            except InconclusiveBound as exc:
                payload.update(isomorphic=None, witnessM=exc.witness, status="inconclusive")
                _dump_json(payload, out)
                return EXIT_OK
        if args.method in ("oracle", "both"):
            verdicts["oracle"] = _oracle_decide(params, omega, omega_prime, args.bound)
        first = next(iter(verdicts.values()))
        if len(set(verdicts.values())) > 1:
            payload["disagreement"] = {k: list(v) for k, v in verdicts.items()}
            status = EXIT_MISMATCH
        payload.update(isomorphic=first[0], witnessM=first[1], status="decided")
        _dump_json(payload, out)
        return status
    if args.h is None:
        raise UsageError("--h is required")
    if args.action == "tree":
        tree = build_blowup_tree(params, omega, args.h)
        _dump_json(
            {
                "command": "lattice tree",
                "d": params.d,
                "n": params.n,
                "omega": str(omega),
                "h": args.h,
                "scale": tree.scale,
                "vertices": tree.coords.tolist(),
                "edges": tree.edges.tolist(),
                "centers": [int(c) for c in tree.centers],
            },
            out,
        )
        return EXIT_OK
    cm = center_matrix(params, omega, args.M, args.h)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerows(cm.distances.tolist())
    else:
        _dump_json(
            {
                "command": "lattice gamma",
                "d": params.d,
                "n": params.n,
                "omega": str(omega),
                "M": args.M,
                "h": args.h,
                "distances": cm.distances.tolist(),
            },
            out,
        )
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="vicsek", description="Vicsek set graphs, spectra and lattices.", formatter_class=fmt)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def dn(sp, required=True):
        default = argparse.SUPPRESS if required else None
        sp.add_argument("--d", type=int, required=required, default=default, help="dimension (>= 2)")
        sp.add_argument("--n", type=int, required=required, default=default, help="branch length (>= 2)")

    s = sub.add_parser("spectrum", help="Neumann or Dirichlet spectrum of level m", formatter_class=fmt)
    dn(s)
    s.add_argument("--m", type=int, required=True, default=argparse.SUPPRESS, help="level")
    s.add_argument("--mode", choices=["neumann", "dirichlet"], default="neumann")
    s.add_argument("--method", choices=["decimation", "dense", "both"], default="decimation")
    s.add_argument("--format", choices=["json", "csv"], default="json")
    s.add_argument("--cluster-tol", type=float, default=CLUSTER_TOL, help="dense clustering tolerance")
    s.add_argument("--atol", type=float, default=1e-8, help="comparison tolerance for --method both")
    s.add_argument("--threads", type=int, default=1, help="worker threads (output never depends on it)")
    s.set_defaults(func=cmd_spectrum)

    g = sub.add_parser("graph", help="export the level-m graph", formatter_class=fmt)
    dn(g)
    g.add_argument("--m", type=int, required=True, default=argparse.SUPPRESS, help="level")
    g.add_argument("--format", choices=["json", "csv"], default="json")
    g.set_defaults(func=cmd_graph)

    e = sub.add_parser("extend", help="extend an eigenfunction from level m to m+1", formatter_class=fmt)
    dn(e)
    e.add_argument("--m", type=int, required=True, default=argparse.SUPPRESS, help="coarse level")
    e.add_argument("--lam", required=True, default=argparse.SUPPRESS, help="fine eigenvalue, decimal or p/q")
    e.add_argument("--mode", choices=["neumann", "dirichlet"], default="neumann")
    e.add_argument("--input", help="JSON file with a 'values' list; default: dense eigenvector for R(lam)")
    e.add_argument("--residual-tol", type=float, default=RESIDUAL_TOL)
    e.set_defaults(func=cmd_extend)

    v = sub.add_parser("verify", help="run a desk-scale property suite", formatter_class=fmt)
    v.add_argument("--suite", choices=["identities", "spectra", "eigenmaps", "lattice", "all"], default="all")
    dn(v, required=False)
    v.add_argument("--pairs", type=int, default=200, help="random pairs per (d, n) for the lattice suite")
    v.add_argument("--horizon", type=int, default=8, help="tree horizon for the lattice suite")
    v.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    v.add_argument("--threads", type=int, default=1, help="worker threads")
    v.set_defaults(func=cmd_verify)

    lat = sub.add_parser("lattice", help="lattice trees and isomorphism", formatter_class=fmt)
    lat.add_argument("action", choices=["iso", "tree", "gamma"])
    dn(lat, required=False)
    lat.add_argument("--omega", required=True, help='sequence "prefix|cycle", e.g. "0,(1,1)|(2,1)"')
    lat.add_argument("--omega-prime", help="second sequence (iso)")
    lat.add_argument("--bound", type=int, default=16, help="largest witness M searched (iso)")
    lat.add_argument("--method", choices=["thm56", "oracle", "both"], default="thm56",
                     help="letter conditions, center-distance oracle, or both (iso)")
    lat.add_argument("--M", type=int, default=0, help="first center index (gamma)")
    lat.add_argument("--h", type=int, help="horizon (tree, gamma)")
    lat.add_argument("--format", choices=["json", "csv"], default="json")
    lat.set_defaults(func=cmd_lattice)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "lattice":
            args.d = 2 if args.d is None else args.d
            args.n = 2 if args.n is None else args.n
            if args.action == "iso" and args.omega_prime is None:
                raise UsageError("--omega-prime is required for iso")
        buf = io.StringIO()
        status = args.func(args, buf)
        out.write(buf.getvalue())
        return status
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (UsageError, InvalidParams, EmptyInterior) as exc:
        print(f"vicsek: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RootCountMismatch, SingularSystem, ForbiddenEigenvalue, NearForbidden,
            NotAnEigenfunction, CapacityExceeded) as exc:
        print(f"vicsek: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"vicsek: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: coloring-check, build-hamiltonian, quadrature, evolve,
report.  Structured output goes to stdout or --out as JSON or CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .cimatrix import build_ci_matrix, gamma_census
from .coloring import coloring_census
from .determinants import enumerate_basis
from .driver import (budget_errors, build_term_family, count_gamma,
                     embed_plus, exact_evolve, extract_plus, ingest,
                     load_config, run_pipeline)
from .lcu import evolve
from .quadrature import (delta_for_grid, plan_quadrature, riemann_S0,
                         riemann_S1, riemann_S2)


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_common(p):
    p.add_argument("--config", help="problem config JSON")
    p.add_argument("--epsilon", type=float, help="total error target override")
    p.add_argument("--time", type=float, help="evolution time override")
    p.add_argument("--delta", type=float, help="integral accuracy override")
    p.add_argument("--zeta", type=float, help="rounding precision override")
    p.add_argument("--mode", choices=["exact", "riemann"], default="exact")
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="write to this path instead of stdout")


def _load(args):
    config = load_config(args.config)
    if args.epsilon is not None:
        config.epsilon = args.epsilon
    if args.time is not None:
        config.time = args.time
    if args.delta is not None:
        config.overrides["delta"] = args.delta
    if args.zeta is not None:
        config.overrides["zeta"] = args.zeta
    return config


def cmd_coloring_check(args):
    census = coloring_census(args.norb, args.eta)
    payload = {
        "norb": census.norb, "eta": census.eta, "nodes": census.n_nodes,
        "single_colors": census.n_single_colors,
        "double_colors": census.n_double_colors,
        "edges_expected": census.edges_expected,
        "edges_found": census.edges_found,
        "duplicate_edges": census.duplicate_edges,
        "uncovered_edges": census.uncovered_edges,
        "inverse_failures": census.inverse_failures,
        "injectivity_failures": census.injectivity_failures,
        "valid": census.valid,
        "gamma_count": count_gamma(args.norb, args.eta),
    }
    if args.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(payload.keys())
        w.writerow(payload.values())
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0 if census.valid else 1


def cmd_build_hamiltonian(args):
    config = _load(args)
    _, table = ingest(config)
    H = build_ci_matrix(table, config.eta)
    census = gamma_census(config.norb, config.eta)
    if args.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["row", "col", "re", "im"])
        for i in range(H.shape[0]):
            for j in range(H.shape[1]):
                w.writerow([i, j, repr(float(H[i, j].real)),
                            repr(float(H[i, j].imag))])
        _emit(buf.getvalue(), args.out)
    else:
        payload = {
            "basis": [list(d.occ) for d in enumerate_basis(config.norb, config.eta)],
            "matrix_re": H.real.tolist(),
            "matrix_im": H.imag.tolist(),
            "gamma_census": census,
        }
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_quadrature(args):
    config = _load(args)
    bounds, table = ingest(config)
    idx = [int(x) for x in args.orbitals.split(",")]
    kind = args.kind
    zq = 1.0
    if kind == "s1":
        zq = float(config.nuclei[args.q][0])
    if args.grid_n is not None:
        delta = delta_for_grid(kind, args.grid_n, bounds, zq=zq)
    elif args.delta is not None:
        delta = args.delta
    else:
        delta, _, _ = budget_errors(config.epsilon, config.time,
                                    count_gamma(config.norb, config.eta))
    if kind == "s0":
        spec = plan_quadrature("s0", idx[0], idx[1], delta, bounds,
                               config.orbitals)
        terms = riemann_S0(idx[0], idx[1], spec, config.orbitals)
    elif kind == "s1":
        spec = plan_quadrature("s1", idx[0], idx[1], delta, bounds,
                               config.orbitals, config.nuclei, q=args.q)
        terms = riemann_S1(idx[0], idx[1], args.q, spec, config.orbitals,
                           config.nuclei)
    else:
        spec = plan_quadrature("s2", idx[0], idx[1], delta, bounds,
                               config.orbitals, k=idx[2], l=idx[3])
        terms = riemann_S2(idx[0], idx[1], idx[2], idx[3], spec,
                           config.orbitals)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["rho", "re", "im", "bound"])
    for term in terms:
        w.writerow([term.rho, repr(float(term.value.real)),
                    repr(float(term.value.imag)),
                    repr(float(term.magnitude_bound))])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_evolve(args):
    config = _load(args)
    bounds, table = ingest(config)
    n_gamma = count_gamma(config.norb, config.eta)
    delta, zeta, eps_taylor = budget_errors(config.epsilon, config.time,
                                            n_gamma)
    delta = float(config.overrides.get("delta", delta))
    zeta = float(config.overrides.get("zeta", zeta))
    family = build_term_family(table, config.eta, zeta, mode=args.mode,
                               bounds=bounds, delta=delta,
                               grid_cap=int(config.overrides.get("grid_cap", 256)))
    H = build_ci_matrix(table, config.eta)
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[0] = 1.0
    psi_out, info = evolve(family, embed_plus(psi0), config.time, eps_taylor)
    psi_final, _ = extract_plus(psi_out)
    ref = exact_evolve(H, psi0, config.time)
    payload = {
        "r": info.r,
        "K": info.K,
        "lambda": info.lam,
        "per_segment_deviation": list(info.per_segment_deviation),
        "final_error_vs_exact": float(np.linalg.norm(psi_final - ref)),
    }
    _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def cmd_report(args):
    config = _load(args)
    report = run_pipeline(config, mode=args.mode)
    if args.output == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        flat = report.to_dict()
        w.writerow(["key", "value"])
        for section in ("dims", "error_ledger"):
            for k, v in flat[section].items():
                w.writerow([f"{section}.{k}", v])
        w.writerow(["status", flat["status"]])
        w.writerow(["fidelity", flat["fidelity"]])
        w.writerow(["l2_error_vs_exact", flat["l2_error_vs_exact"]])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(report.to_json() + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cisim",
        description="CI-matrix simulation pipeline: build, check, evolve")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coloring-check",
                       help="validity and coverage census of the edge coloring")
    p.add_argument("--norb", type=int, required=True)
    p.add_argument("--eta", type=int, required=True)
    p.add_argument("--output", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_coloring_check)

    p = sub.add_parser("build-hamiltonian",
                       help="dense CI matrix and labelled-term census")
    _add_common(p)
    p.set_defaults(fn=cmd_build_hamiltonian)

    p = sub.add_parser("quadrature", help="dump per-term Riemann CSV")
    _add_common(p)
    p.add_argument("--kind", choices=["s0", "s1", "s2"], required=True)
    p.add_argument("--orbitals", required=True,
                   help="comma-separated 1-based indices: i,j or i,j,k,l")
    p.add_argument("--q", type=int, default=0, help="nucleus index for s1")
    p.add_argument("--grid-n", type=int, dest="grid_n",
                   help="pick delta to hit this per-axis grid")
    p.set_defaults(fn=cmd_quadrature)

    p = sub.add_parser("evolve", help="segmented Taylor evolution summary")
    _add_common(p)
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("report", help="full pipeline run report")
    _add_common(p)
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

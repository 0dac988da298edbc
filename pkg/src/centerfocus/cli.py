"""Command-line entry point: ``centerfocus analyze|diagram|corpus``."""

import argparse
import os
import sys

import jsonschema

from .classify import AnalysisConfig, InputError, InvariantViolation, analyze, load_system
from .diagram import DiagramError
from .report import emit_report, report_data, validate_report

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3


def _pair(text):
    try:
        p, q = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected p,q with integers, got {text!r}")
    return p, q


def _grid(text):
    try:
        lo, hi, n = text.split(",")
        return float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo,hi,n, got {text!r}")


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _resolve(path):
    if os.path.exists(path):
        return load_system(path)
    from .suite import corpus_names, load_entry
    if path in corpus_names():
        return load_entry(path)
    raise InputError(f"no such system file or corpus entry: {path}")


def build_parser():
    ap = argparse.ArgumentParser(prog="centerfocus",
                                 description="Center-focus analysis of monodromic singularities.")
    ap.add_argument("--threads", type=int, help="worker threads (overrides CENTERFOCUS_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze one system file (or corpus entry name)")
    a.add_argument("file")
    a.add_argument("--weights", type=_pair, help="flow chart weights p,q (default: last Newton edge)")
    a.add_argument("--json", action="store_true", help="emit the JSON report")
    a.add_argument("--rho0-grid", type=_grid, help="lo,hi,n geometric sample grid")
    a.add_argument("--bautin-order", type=int)
    a.add_argument("--branch-order", type=int)
    a.add_argument("--param", type=_param, action="append", default=[], help="override a parameter, name=value")

    d = sub.add_parser("diagram", help="print the Newton diagram and per-edge data")
    d.add_argument("file")
    d.add_argument("--param", type=_param, action="append", default=[])

    c = sub.add_parser("corpus", help="run the bundled example checks")
    c.add_argument("name", nargs="?")
    return ap


def _cmd_analyze(args, out):
    spec = _resolve(args.file)
    overrides = dict(spec.config)
    if args.weights:
        overrides["weights"] = args.weights
    if args.rho0_grid:
        overrides["rho0_grid"] = args.rho0_grid
    if args.bautin_order is not None:
        overrides["bautin_order"] = args.bautin_order
    if args.branch_order is not None:
        overrides["branch_order"] = args.branch_order
    cfg = AnalysisConfig.from_mapping(overrides)
    report = analyze(spec, cfg, params=dict(args.param))
    validate_report(report_data(report))
    out.write(emit_report(report, "json" if args.json else "text").decode("utf-8"))
    return EXIT_OK


def _cmd_diagram(args, out):
    from .blowup import polar_components
    from .branches import q_polynomial
    from .diagram import newton_diagram, qh_decompose
    spec = _resolve(args.file)
    X = spec.field(dict(args.param))
    d = newton_diagram(X)
    out.write("vertices: " + " ".join(f"({a},{b})" for a, b in d.vertices) + "\n")
    for e in d.edges:
        ps = polar_components(X, e.weights)
        Qp = q_polynomial(qh_decompose(X, e.weights).leading(), e.weights)
        omega = ", ".join(f"{rt.angle:.6g}^{rt.multiplicity}" for rt in ps.omega or []) or "none"
        out.write(f"edge {e.start}-{e.end}: weights {e.weights}, r = {e.leading_degree}, "
                  f"orientation {ps.orientation}, characteristic directions {omega}\n")
        out.write(f"  determining polynomial (eta^0..): {', '.join(str(c) for c in Qp.coeffs)}\n")
    for w in d.warnings:
        out.write(f"warning: {w}\n")
    return EXIT_OK


def _cmd_corpus(args, out):
    from .suite import format_table, run_corpus
    results = run_corpus(args.name)
    out.write(format_table(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        os.environ["CENTERFOCUS_THREADS"] = str(max(1, args.threads))
    handler = {"analyze": _cmd_analyze, "diagram": _cmd_diagram, "corpus": _cmd_corpus}[args.command]
    try:
        return handler(args, out)
    except (InputError, DiagramError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (InvariantViolation, jsonschema.ValidationError) as exc:
        sys.stderr.write(f"internal invariant violation: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 verification failed (report still
written), 3 solver did not converge (partial results written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InflapError, NotAnEigenpair, ParseError
from .fixtures import FUNCTIONS, GRAPHS, fixture
from .graph import ATOL, RTOL, Graph, as_node_function, boundary_distance, graph_to_dict, validate_graph
from .inf_spectral import (
    check_limit_equation,
    densities_from_certificate,
    find_generalized_certificate,
    infinity_variational_bounds,
    support_subgraph_check,
    verify_certificate,
)
from .nodal import split_at_zeros
from .p_spectral import SolverOptions, default_schedule, p_sweep
from .packing import packing_radius

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_SOLVER = 0, 1, 2, 3


def threads() -> int:
    """Parallelism cap from ``INFLAP_THREADS`` (every command currently runs serially)."""
    try:
        return max(1, int(os.environ.get("INFLAP_THREADS", "1")))
    except ValueError:
        return 1


def _clean(x):
    """JSON-ready copy: numpy scalars to Python, non-finite floats to ``None``."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def dumps(obj) -> str:
    # float repr is the shortest string that round-trips exactly
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, text: str) -> None:
    if args.out:
        write_atomic(Path(args.out), text)
    else:
        sys.stdout.write(text)


def read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def load_graph(path) -> Graph:
    return validate_graph(read_json(path))


def load_function(g: Graph, path) -> np.ndarray:
    raw = read_json(path)
    if not isinstance(raw, dict) or not isinstance(raw.get("values"), dict):
        raise ParseError(f"{path}: expected an object with a 'values' mapping")
    try:
        vals = {k: float(v) for k, v in raw["values"].items()}
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: non-numeric value ({exc})") from exc
    return as_node_function(g, vals)


def function_to_dict(g: Graph, f) -> dict:
    return {"values": g.to_mapping(f)}


def number(text: str) -> float:
    """Decimal or fraction (``6/5``)."""
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def positive(text: str) -> float:
    x = number(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


# commands -----------------------------------------------------------------


def cmd_validate(args):
    g = load_graph(args.graph)
    emit(args, dumps({"valid": True, "interior": len(g.interior), "boundary": len(g.boundary),
                      "edges": g.n_edges}))
    return EXIT_OK


def cmd_distances(args):
    g = load_graph(args.graph)
    d = g.distances
    emit(args, dumps({
        "boundary_distance": g.to_mapping(boundary_distance(g)),
        "distances": {u: {v: d[i, j] for j, v in enumerate(g.ids)} for i, u in enumerate(g.ids)},
    }))
    return EXIT_OK


def cmd_packing(args):
    g = load_graph(args.graph)
    emit(args, dumps(packing_radius(g, args.k).as_dict()))
    return EXIT_OK


def cmd_sweep(args):
    g = load_graph(args.graph)
    opts = SolverOptions(tol=args.tol if args.tol is not None else SolverOptions.tol)
    records = p_sweep(g, default_schedule(args.pmax), args.mode, opts)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "lambda", "lambda_root", "residual", "iterations"])
    for r in records:
        w.writerow([repr(float(r.p)), repr(float(r.lam)), repr(float(r.lam_root)),
                    repr(float(r.residual)), r.iterations])
    emit(args, buf.getvalue())
    return EXIT_OK if all(r.converged for r in records) else EXIT_SOLVER


def _tols(args):
    return (args.tol if args.tol is not None else RTOL,
            args.tol_abs if args.tol_abs is not None else ATOL)


def cmd_check_limit(args):
    g = load_graph(args.graph)
    f = load_function(g, args.function)
    rtol, atol = _tols(args)
    rep = check_limit_equation(g, f, args.Lambda, rtol, atol)
    emit(args, dumps(rep.as_dict()))
    return EXIT_OK if rep.overall else EXIT_VERIFY


def cmd_check_generalized(args):
    g = load_graph(args.graph)
    f = load_function(g, args.function)
    rtol, atol = _tols(args)
    try:
        cert = find_generalized_certificate(g, f, args.Lambda, rtol, atol)
    except NotAnEigenpair as exc:
        emit(args, dumps({"Lambda": args.Lambda, "eigenpair": False, "reason": str(exc),
                          "frontier": exc.frontier}))
        return EXIT_VERIFY
    ver = verify_certificate(g, f, args.Lambda, cert, rtol, atol)
    dens = densities_from_certificate(g, f, args.Lambda, cert, rtol, atol)
    supp = support_subgraph_check(g, f, args.Lambda, dens, rtol, atol)
    emit(args, dumps({
        "Lambda": args.Lambda,
        "eigenpair": True,
        "certificate": cert.as_dict(g),
        "verification": ver.as_dict(),
        "densities": dens.as_dict(g),
        "support_check": supp.as_dict(),
    }))
    return EXIT_OK if ver.passed and supp.passed else EXIT_VERIFY


def cmd_bounds(args):
    g = load_graph(args.graph)
    emit(args, dumps({"bounds": [b.as_dict() for b in infinity_variational_bounds(g, args.kmax)]}))
    return EXIT_OK


def cmd_split(args):
    g = load_graph(args.graph)
    f = load_function(g, args.function)
    _, atol = _tols(args)
    emit(args, dumps(split_at_zeros(g, f, atol).as_dict()))
    return EXIT_OK


def cmd_fixtures(args):
    g = fixture(args.name)
    out = Path(args.out or ".")
    written = [out / f"{args.name}.json"]
    write_atomic(written[0], dumps(graph_to_dict(g)))
    for stem, (gname, vals, lam) in FUNCTIONS.items():
        if gname == args.name:
            p = out / f"{stem}.json"
            write_atomic(p, dumps({"values": vals, "Lambda": lam}))
            written.append(p)
    sys.stdout.write(dumps({"written": [str(p) for p in written]}))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is reserved for failed checks
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="inflap", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, function=False, tol=False):
        p.add_argument("--graph", required=True, help="graph JSON file")
        if function:
            p.add_argument("--function", required=True, help="node function JSON file")
        if tol:
            p.add_argument("--tol", type=positive, default=None, help=f"relative tolerance (default {RTOL})")
            p.add_argument("--tol-abs", type=positive, default=None, help=f"absolute tolerance (default {ATOL})")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized restarts")

    p = sub.add_parser("validate", help="validate a graph file")
    common(p)
    p.set_defaults(run=cmd_validate)

    p = sub.add_parser("distances", help="all-pairs and boundary distances")
    common(p)
    p.set_defaults(run=cmd_distances)

    p = sub.add_parser("packing", help="k-th packing radius and centers")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(run=cmd_packing)

    p = sub.add_parser("sweep", help="p-continuation of the first or second eigenpair (CSV)")
    common(p)
    p.add_argument("--mode", choices=["first", "second"], default="first")
    p.add_argument("--pmax", type=positive, default=128)
    p.add_argument("--tol", type=positive, default=None, help="solver tolerance")
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("check-limit", help="check the limit eigenvalue equation")
    common(p, function=True, tol=True)
    p.add_argument("--lambda", dest="Lambda", type=number, required=True)
    p.set_defaults(run=cmd_check_limit)

    p = sub.add_parser("check-generalized", help="find and verify a generalized eigenpair certificate")
    common(p, function=True, tol=True)
    p.add_argument("--lambda", dest="Lambda", type=number, required=True)
    p.set_defaults(run=cmd_check_generalized)

    p = sub.add_parser("bounds", help="upper bounds 1/R_k on the variational eigenvalues")
    common(p)
    p.add_argument("--kmax", type=int, required=True)
    p.set_defaults(run=cmd_bounds)

    p = sub.add_parser("split", help="split a graph at the zeros of a function")
    common(p, function=True, tol=True)
    p.set_defaults(run=cmd_split)

    p = sub.add_parser("fixtures", help="write a bundled fixture graph and its functions")
    p.add_argument("name", help=f"one of {', '.join(sorted(GRAPHS))}")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.set_defaults(run=cmd_fixtures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads()
    try:
        return args.run(args)
    except InflapError as exc:
        detail = {"error": type(exc).__name__, "message": str(exc)}
        violations = getattr(exc, "violations", None)
        if violations and len(violations) > 1:
            detail["violations"] = [f"{type(v).__name__}: {v}" for v in violations]
        sys.stderr.write(dumps(detail))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

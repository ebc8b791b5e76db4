"""Command-line interface.

Subcommands: solve, stability, evolve, profile, compare, check.  The
requested artifact goes to stdout (or to the --json/--svg/--csv paths);
diagnostics go to stderr.  Exit codes: 0 ok, 2 input, 3 solver,
4 stationarity, 5 topology event.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .io import DocumentError, GraphDocument, profile_csv, ranking_csv, render_svg

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_STATIONARITY = 4
EXIT_TOPOLOGY = 5


class InputError(ValueError):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def parse_areas(spec: str | None, n: int | None, normalize: bool, seed: int | None = None):
    """Areas from "equal", "random" or a comma list; returns AreaTargets."""
    from .solver import AreaTargets, AreaTargetsError

    try:
        if spec is None or spec == "equal":
            if n is None:
                raise InputError("--areas equal needs --n (or a template that fixes it)")
            return AreaTargets.equal(n)
        if spec == "random":
            if n is None:
                raise InputError("--areas random needs --n")
            rng = np.random.default_rng(seed)
            return AreaTargets.of(rng.dirichlet([3.0] * n), normalize=True)
        try:
            vals = [float(x) for x in spec.split(",") if x.strip()]
        except ValueError as exc:
            raise InputError(f"cannot parse areas {spec!r}") from exc
        if n is not None and len(vals) != n:
            raise InputError(f"--n {n} but {len(vals)} areas given")
        return AreaTargets.of(vals, normalize=normalize)
    except AreaTargetsError as exc:
        hint = "" if normalize else " (use --normalize to rescale)"
        raise InputError(f"{exc}{hint}") from exc


def _provenance(command: str) -> dict:
    return {"command": command, "version": __version__}


# -- commands ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    from .solver import DegenerateTargetsError, SolverError, solve

    targets = parse_areas(args.areas, args.n, args.normalize)
    if targets.n not in (2, 3):
        raise InputError("solve handles 2 or 3 regions")
    try:
        g = solve(targets)
    except DegenerateTargetsError as exc:
        raise InputError(str(exc)) from exc
    except SolverError as exc:
        _log(f"solver failure: {exc}")
        return EXIT_SOLVER
    doc = GraphDocument.from_partition_graph(
        g, {"areas": list(targets), "perimeter": g.length, "provenance": _provenance("solve")}
    )
    _log(f"perimeter {g.length:.12f}")
    _write(doc.dumps(), args.json)
    if args.svg:
        _write(render_svg(doc), args.svg)
    return EXIT_OK


_INSTANCES = ("conf_a", "hex", "conf_c")


def _instance(name: str):
    from .instances import configuration_a, hexagon_graph, square_configuration_c

    if name == "conf_a":
        return configuration_a(0.35)
    if name == "hex":
        return hexagon_graph()
    return square_configuration_c(0.45)


def _input_graph(args):
    if args.graph:
        text = sys.stdin.read() if args.graph == "-" else open(args.graph, encoding="utf-8").read()
        return GraphDocument.loads(text).to_partition_graph()
    if args.template:
        if args.template not in _INSTANCES:
            raise InputError(f"no exact instance for {args.template!r}; known: {', '.join(_INSTANCES)}")
        return _instance(args.template)
    if args.areas:
        from .solver import solve

        return solve(parse_areas(args.areas, args.n, args.normalize))
    raise InputError("give a graph document, --template or --areas")


def cmd_check(args) -> int:
    from .standard import check_stationary

    g = _input_graph(args)
    rep = check_stationary(g)
    out = {"stationary": rep.ok(args.tol), "tol": args.tol, **rep.to_dict()}
    _write(json.dumps(out, sort_keys=True, indent=2) + "\n", args.json)
    _log(f"max stationarity residual {rep.max_residual():.3g}")
    return EXIT_OK if out["stationary"] else EXIT_STATIONARITY


def cmd_stability(args) -> int:
    from .stability import DEFAULT_M, analyze
    from .standard import check_stationary

    g = _input_graph(args)
    rep = check_stationary(g)
    if not rep.ok(args.tol):
        _log(f"graph is not stationary (max residual {rep.max_residual():.3g} >= {args.tol:g})")
        out = {"stationary": False, "stationarity": rep.to_dict()}
        _write(json.dumps(out, sort_keys=True, indent=2) + "\n", args.json)
        return EXIT_STATIONARITY
    res = analyze(g, k=args.k, m=args.m or DEFAULT_M)
    out = {"stationary": True, "stationarity": rep.to_dict(), **res.to_dict()}
    _log(f"verdict {res.verdict}, lambda_min {res.lambda_min:.6g}")
    _write(json.dumps(_jsonable(out), sort_keys=True, indent=2) + "\n", args.json)
    return EXIT_OK


def _jsonable(obj):
    from .io import _plain

    return _plain(obj)


def cmd_evolve(args) -> int:
    from .evolver import (
        InfeasibleTemplateError,
        RelaxError,
        TopologyEvent,
        get_template,
        pressures_estimate,
        relax,
        template_instantiate,
    )

    try:
        t = get_template(args.template)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc
    if args.n is not None and args.n != t.n_regions:
        raise InputError(f"template {t.name} has {t.n_regions} regions, not {args.n}")
    targets = parse_areas(args.areas, t.n_regions, args.normalize, args.seed)
    try:
        g = template_instantiate(t, list(targets), n_pts=args.n_pts)
    except InfeasibleTemplateError as exc:
        _log(str(exc))
        return EXIT_SOLVER
    if args.seed is not None and args.areas != "random":
        # a small deterministic perturbation of the seed offsets
        rng = np.random.default_rng(args.seed)
        g.x[g.n_jdof :] += rng.normal(0.0, 1e-3, g.n_dof - g.n_jdof)
    try:
        r = relax(g, max_iters=args.max_iters, tol=args.tol)
    except TopologyEvent as ev:
        _log(str(ev))
        _write(json.dumps(ev.to_dict(), sort_keys=True, indent=2) + "\n", args.json)
        return EXIT_TOPOLOGY
    except RelaxError as exc:
        _log(str(exc))
        return EXIT_SOLVER
    est = pressures_estimate(g, tol=max(args.tol, 1e-6)) if r.converged else None
    meta = {
        "areas": list(targets),
        "provenance": _provenance("evolve"),
        "relax": r.to_dict(),
    }
    if est is not None:
        meta["pressure_fit"] = est.to_dict()
    doc = GraphDocument.from_discrete(g, meta)
    doc_dict = doc.to_dict()
    doc_dict.update({"perimeter": r.perimeter, "multipliers": list(r.multipliers), "iterations": r.iterations, "converged": r.converged})
    _log(f"{t.name}: perimeter {r.perimeter:.9f}, converged {r.converged}, {r.iterations} iterations")
    _write(json.dumps(_jsonable(doc_dict), sort_keys=True, indent=2) + "\n", args.json)
    if args.svg:
        _write(render_svg(doc), args.svg)
    return EXIT_OK


def cmd_profile(args) -> int:
    from .solver import profile_sweep

    n = args.n or 3
    if n not in (2, 3):
        raise InputError("profile handles n = 2 or 3")
    if args.grid < 2:
        raise InputError("--grid must be at least 2")
    pts = profile_sweep(n, args.grid, workers=args.workers)
    bad = sum(p.error is not None for p in pts)
    if bad:
        _log(f"{bad} grid points failed; see the error column")
    _write(profile_csv(pts, n), args.csv)
    return EXIT_OK


def cmd_compare(args) -> int:
    from .evolver import catalog_for, compare_candidates

    n = args.n
    if n is None and args.areas not in (None, "equal", "random"):
        n = len([x for x in args.areas.split(",") if x.strip()])
    if n is None:
        n = 3
    catalog = catalog_for(n)
    if not catalog:
        raise InputError(f"no templates for n = {n}")
    targets = parse_areas(args.areas, n, args.normalize, args.seed)
    _log("areas " + ", ".join(repr(a) for a in targets))
    res = compare_candidates(list(targets), catalog, n_pts=args.n_pts, max_iters=args.max_iters, tol=args.tol, workers=args.workers)
    width = max(len(r.name) for r in res)
    lines = [f"{'template':<{width}}  {'perimeter':>14}  converged  status"]
    for r in res:
        p = "-" if r.perimeter is None else f"{r.perimeter:.9f}"
        lines.append(f"{r.name:<{width}}  {p:>14}  {str(r.converged):<9}  {r.status}")
    table = "\n".join(lines) + "\n"
    if "-" in (args.json, args.csv):
        sys.stderr.write(table)
    else:
        _write(table, None)
    if args.json:
        out = {"areas": list(targets), "ranking": [r.to_dict() for r in res]}
        _write(json.dumps(_jsonable(out), sort_keys=True, indent=2) + "\n", args.json)
    if args.csv:
        _write(ranking_csv(res), args.csv)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


def _positive(kind):
    def conv(s: str):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {s}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diskpart", description="Least-perimeter partitions of the unit disk.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def areas(sp, default=None):
        sp.add_argument("--areas", default=default, help='comma-separated areas, "equal" or "random"')
        sp.add_argument("--normalize", action="store_true", help="rescale positive areas to sum to pi")
        sp.add_argument("--n", type=_positive(int), help="number of regions")
        sp.add_argument("--seed", type=int, help="seed for random areas or perturbed starts")

    def outputs(sp, svg=False, csv=False):
        sp.add_argument("--json", metavar="PATH", help="write the JSON artifact here instead of stdout")
        if svg:
            sp.add_argument("--svg", metavar="PATH", help="also write an SVG rendering")
        if csv:
            sp.add_argument("--csv", metavar="PATH", help="write the CSV table here")

    def evolver_opts(sp):
        sp.add_argument("--n-pts", type=_positive(int), default=32, help="points per polyline edge")
        sp.add_argument("--tol", type=_positive(float), default=1e-9, help="constrained gradient tolerance")
        sp.add_argument("--max-iters", type=_positive(int), default=100)

    s = sub.add_parser("solve", help="exact standard graph for 2 or 3 areas")
    areas(s)
    outputs(s, svg=True)
    s.set_defaults(func=cmd_solve)

    for name, fn, helptext in (
        ("stability", cmd_stability, "index-form spectrum and instability certificates"),
        ("check", cmd_check, "stationarity residuals of a graph"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("graph", nargs="?", help='graph document path, or "-" for stdin')
        s.add_argument("--template", help="exact stationary instance: " + ", ".join(_INSTANCES))
        areas(s)
        s.add_argument("--tol", type=_positive(float), default=1e-6, help="stationarity tolerance")
        if name == "stability":
            s.add_argument("--m", type=_positive(int), help="elements per edge")
            s.add_argument("--k", type=_positive(int), default=4, help="number of eigenvalues")
        outputs(s)
        s.set_defaults(func=fn)

    s = sub.add_parser("evolve", help="relax one template at the given areas")
    s.add_argument("--template", required=True)
    areas(s, default="equal")
    evolver_opts(s)
    outputs(s, svg=True)
    s.set_defaults(func=cmd_evolve)

    s = sub.add_parser("profile", help="least perimeter over a simplex grid (CSV)")
    s.add_argument("--n", type=_positive(int), default=3)
    s.add_argument("--grid", type=int, default=11)
    s.add_argument("--workers", type=_positive(int), default=1)
    outputs(s, csv=True)
    s.set_defaults(func=cmd_profile)

    s = sub.add_parser("compare", help="relax every template for n regions and rank them")
    areas(s, default="equal")
    evolver_opts(s)
    s.add_argument("--workers", type=_positive(int), default=1)
    outputs(s, csv=True)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, DocumentError, OSError) as exc:
        _log(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

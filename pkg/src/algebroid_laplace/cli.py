"""Command line front end: validate | tensors | laplacian | check | integrate.

Exit codes: 0 pass, 1 check failure, 2 usage, file or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import expr as ex
from . import calculus as calc
from . import forms as fm
from .checks import SUITES, CheckOptions, build_geometry, run_suites
from .connection import build_connection, is_kahler
from .finsler import FinslerError, build_finsler
from .parsing import ExprSyntaxError, parse_expr
from .quadrature import BudgetExceededError, check_integral_identity
from .report import ValidationReport
from .scenario import ScenarioError, format_form_key, load_scenario, parse_point

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _c(x) -> list[float]:
    x = complex(x)
    # normalise -0.0 so reports stay byte-identical
    return [x.real + 0.0, x.imag + 0.0]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _entries(suite: str, report: ValidationReport, seed: int):
    return [{
        "suite": suite,
        "identity": c.name,
        "max_residual": float(c.max_residual),
        "tolerance": float(c.tolerance),
        "samples": int(c.samples),
        "seed": seed,
        "pass": bool(c.passed),
        "informational": bool(c.informational),
        "skipped": bool(c.skipped),
        "note": c.note,
    } for c in report.checks]


def _check_report(scenario_id: str, suites, seed: int) -> tuple[dict, bool]:
    entries = []
    for name, rep in suites:
        entries.extend(_entries(name, rep, seed))
    ok = all(e["pass"] for e in entries if not e["informational"])
    return {"scenario": scenario_id, "entries": entries, "pass": ok}, ok


def _options(args) -> CheckOptions:
    return CheckOptions(samples=args.samples, seed=args.seed, tol=args.tol,
                        integral_tol=args.integral_tol, box=args.box, grid=args.grid,
                        budget=args.budget)


# ------------------------------------------------------------- commands

def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario)
    opts = _options(args)
    g = build_geometry(sc, opts)
    report, ok = _check_report(sc.id, run_suites(["algebroid"], g, opts), opts.seed)
    print(_dump(report))
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_tensors(args) -> int:
    sc = load_scenario(args.scenario)
    fd = build_finsler(sc.spec, sc.F)
    cd = build_connection(sc.spec, fd)
    point = parse_point(args.at, sc.n, sc.m)
    ev = ex.Evaluator(point)

    def val(t):
        if isinstance(t, tuple):
            return [val(x) for x in t]
        return _c(ev(t))
    out = {
        "h": val(fd.h), "h_inv": val(fd.h_inv), "det": val(fd.det_h),
        "N": val(cd.N), "L": val(cd.L), "C": val(cd.C), "R": val(cd.R),
        "traces": {"L": val(cd.L_trace), "C": val(cd.C_trace),
                   "structure": val(cd.struct_trace)},
        "index_order": "upper index first, then lower indices; 1-based in text, 0-based arrays",
    }
    print(_dump(out))
    return EXIT_PASS


def cmd_laplacian(args) -> int:
    sc = load_scenario(args.scenario)
    if (args.fn is None) == (args.form is None):
        raise UsageError("give exactly one of --fn or --form")
    fd = build_finsler(sc.spec, sc.F)
    cd = build_connection(sc.spec, fd)
    ev = ex.Evaluator(parse_point(args.at, sc.n, sc.m))
    out = {"kind": args.kind}
    if args.form is not None:
        if args.form not in sc.forms:
            raise UsageError(f"no form named {args.form!r}")
        form = sc.forms[args.form]
        if args.kind in ("h", "v"):
            raise UsageError(f"--kind {args.kind} applies to functions; use box or box-kahler")
    else:
        f = parse_expr(args.fn, sc.n, sc.m)
        if args.kind in ("h", "v"):
            op = calc.laplacian_h if args.kind == "h" else calc.laplacian_v
            result = op(f, fd, cd)
            out.update(expression=ex.to_text(result), value=_c(ev(result)))
            print(_dump(out))
            return EXIT_PASS
        form = fm.HorizontalForm.scalar(sc.m, f)
    if args.kind == "box":
        result = fm.box_h(form, fd, cd)
    else:
        result = fm.box_h_kahler(form, fd, cd)
        out["kahler"] = is_kahler(cd)
    out["p"], out["q"] = result.p, result.q
    out["coefficients"] = {
        format_form_key(A, B): {"expression": ex.to_text(result[A, B]), "value": _c(ev(result[A, B]))}
        for A, B in result.keys()}
    print(_dump(out))
    return EXIT_PASS


def cmd_check(args) -> int:
    sc = load_scenario(args.scenario)
    opts = _options(args)
    g = build_geometry(sc, opts)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    report, ok = _check_report(sc.id, run_suites(names, g, opts), opts.seed)
    print(_dump(report))
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_integrate(args) -> int:
    from .checks import _domain
    sc = load_scenario(args.scenario)
    if args.field not in sc.sections:
        raise UsageError(f"no section named {args.field!r}")
    Z = sc.sections[args.field]
    if not Z.is_horizontal():
        raise UsageError(f"section {args.field!r} is not purely horizontal")
    opts = _options(args)
    g = build_geometry(sc, opts)
    dom = _domain(g, opts)
    rep = check_integral_identity(Z, sc.spec, g.fd, g.cd, dom, opts.integral_tol,
                                  samples=opts.samples, seed=opts.seed)

    def value(name):
        return _c(rep[name].value)

    out = {
        "integral": value("integral nabla_a Z^a - Z^a L_a"),
        "conjugate_integral": value("integral nabla_abar Z^abar - Z^abar L_abar"),
        "support_ratio": rep["support"].max_residual,
        "box": list(dom.bounds[0]), "grid": dom.grid,
        "tolerance_note": (f"midpoint rule on [{dom.bounds[0][0]}, {dom.bounds[0][1]}]^{dom.dims}, "
                           f"{dom.grid} points per axis; pass if |integral| <= {opts.integral_tol}"),
        "pass": rep.passed,
    }
    if "integral nabla_a Z^a (Kaehler)" in rep.names():
        out["kahler_integral"] = value("integral nabla_a Z^a (Kaehler)")
    out["anchor_divergence_corrected_integral"] = value("integral with anchor-divergence correction")
    print(_dump(out))
    return EXIT_PASS if rep.passed else EXIT_FAIL


# --------------------------------------------------------------- parser

def _box(text: str) -> tuple[float, float]:
    text = text.strip()
    sep = ".." if ".." in text else ","
    try:
        if sep in text:
            lo, hi = (float(t) for t in text.split(sep))
        else:
            hi = abs(float(text))
            lo = -hi
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must be LO..HI, LO,HI or R, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError("box needs lower < upper")
    return lo, hi


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="algebroid-laplace",
        description="Finsler geometry on holomorphic Lie algebroids: tensors, Laplacians, checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sampling=True, integration=False):
        p.add_argument("scenario", help="scenario JSON file")
        if sampling:
            p.add_argument("--samples", type=_positive, default=20)
            p.add_argument("--seed", type=int, default=42)
            p.add_argument("--tol", type=float, default=1e-8, help="identity tolerance")
        if integration:
            p.add_argument("--integral-tol", type=float, default=1e-3)
            p.add_argument("--box", type=_box, default=None,
                           help="per-axis bounds, e.g. --box=-4..4 (default from scenario or -4..4)")
            p.add_argument("--grid", type=_positive, default=None,
                           help="points per axis (default from scenario or 64)")
            p.add_argument("--budget", type=_positive, default=None,
                           help="maximum grid points (default from scenario or 2^24)")

    p = sub.add_parser("validate", help="algebroid axioms, homogeneity, pseudoconvexity")
    common(p, integration=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tensors", help="metric and connection coefficients at a point")
    common(p, sampling=False)
    p.add_argument("--at", required=True, help="point, e.g. z1=1,u1=1+0.5i")
    p.set_defaults(func=cmd_tensors)

    p = sub.add_parser("laplacian", help="evaluate a Laplacian at a point")
    common(p, sampling=False)
    p.add_argument("--fn", help="function expression")
    p.add_argument("--form", help="name of a form in the scenario")
    p.add_argument("--kind", choices=("h", "v", "box", "box-kahler"), default="h")
    p.add_argument("--at", required=True)
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("check", help="run identity suites")
    common(p, integration=True)
    p.add_argument("--suite", choices=("all",) + SUITES, default="all")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("integrate", help="integral identity for a named section")
    common(p, integration=True)
    p.add_argument("--field", required=True, help="name of a horizontal section")
    p.set_defaults(func=cmd_integrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        return args.func(args)
    except (ScenarioError, ExprSyntaxError, UsageError, FinslerError, BudgetExceededError,
            ex.EvaluationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Check suites run by the command line front end."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import expr as ex
from . import calculus as calc
from . import forms as fm
from .algebroid import validate_algebroid
from .connection import (ConnectionData, build_connection, check_connection_identities,
                         is_kahler, verify_brackets)
from .finsler import FinslerData, build_finsler, check_homogeneity, check_pseudoconvexity
from .quadrature import (BudgetExceededError, DEFAULT_BUDGET, IntegrationDomain,
                         check_integral_identity)
from .report import CheckResult, ValidationReport, residual, sample_points
from .scenario import Scenario

__all__ = ["CheckOptions", "Geometry", "SUITES", "build_geometry", "default_functions",
           "run_suite", "run_suites"]

SUITES = ("algebroid", "connection", "laplace", "forms", "integrals")
ALGEBROID_TOL = 1e-12


@dataclass(frozen=True)
class CheckOptions:
    samples: int = 20
    seed: int = 42
    tol: float = 1e-8
    integral_tol: float = 1e-3
    box: tuple[float, float] | None = None
    grid: int | None = None
    budget: int | None = None


@dataclass(eq=False)
class Geometry:
    scenario: Scenario
    fd: FinslerData
    cd: ConnectionData
    homogeneous: bool
    kahler: bool


def build_geometry(sc: Scenario, opts: CheckOptions = CheckOptions()) -> Geometry:
    fd = build_finsler(sc.spec, sc.F)
    cd = build_connection(sc.spec, fd)
    return Geometry(sc, fd, cd, check_homogeneity(sc.spec, sc.F, opts.samples, opts.seed),
                    is_kahler(cd, opts.samples, opts.seed))


def default_functions(n: int, m: int) -> list[ex.Expr]:
    """Three generic test functions touching every coordinate and its conjugate."""
    z = [ex.zvar(k) for k in range(n)]
    zb = [ex.zvar(k, True) for k in range(n)]
    u = [ex.uvar(a) for a in range(m)]
    ub = [ex.uvar(a, True) for a in range(m)]
    f1 = ex.total([ex.mul(a, b) for a, b in zip(z + u, zb + ub)])
    f2 = ex.add(ex.mul(ex.exp(z[0]), ub[0]), ex.mul(u[-1], ex.power(zb[-1], 2)))
    f3 = ex.mul(ex.power(ex.add(z[-1], ub[-1]), 2), ex.add(u[0], ex.mul(ex.const(0.5j), zb[0])))
    return [f1, f2, f3]


def _functions(g: Geometry) -> list[ex.Expr]:
    sc = g.scenario
    return list(sc.functions.values()) or default_functions(sc.n, sc.m)


def _horizontal_sections(g: Geometry) -> list[calc.SectionField]:
    found = [s for s in g.scenario.sections.values() if s.is_horizontal()]
    if found:
        return found
    m = g.scenario.m
    z = ex.zvar(0)
    return [calc.SectionField.horizontal([ex.ONE] * m),
            calc.SectionField.horizontal([ex.mul(ex.const(a + 1), z) for a in range(m)])]


def _worst(ev: ex.Evaluator, pairs) -> float:
    return max((residual(ev.full(a), ev.full(b)) for a, b in pairs), default=0.0)


# --------------------------------------------------------------- suites

def suite_algebroid(g: Geometry, opts: CheckOptions) -> ValidationReport:
    sc = g.scenario
    report = validate_algebroid(sc.spec, opts.samples, opts.seed, ALGEBROID_TOL)
    report.add(CheckResult("homogeneity", 0.0 if g.homogeneous else 1.0, 0.0, opts.samples))
    convex = check_pseudoconvexity(sc.spec, g.fd, opts.samples, opts.seed)
    report.add(CheckResult("strict pseudoconvexity", 0.0 if convex else 1.0, 0.0, opts.samples))
    return report


def suite_connection(g: Geometry, opts: CheckOptions) -> ValidationReport:
    report = check_connection_identities(g.cd, opts.samples, opts.seed, opts.tol, g.homogeneous)
    report.extend(verify_brackets(g.scenario.spec, g.cd, _functions(g)[:3], opts.samples,
                                  opts.seed, opts.tol))
    return report


def suite_laplace(g: Geometry, opts: CheckOptions) -> ValidationReport:
    sc, fd, cd = g.scenario, g.fd, g.cd
    n, m, s = sc.n, sc.m, opts.samples
    ev = ex.Evaluator(sample_points(n, m, s, opts.seed))
    fns = _functions(g)
    report = ValidationReport()
    report.add(CheckResult(
        "laplacian_h coordinate = covariant",
        _worst(ev, ((calc.laplacian_h(f, fd, cd), calc.laplacian_h_cov(f, fd, cd)) for f in fns)),
        opts.tol, s))
    report.add(CheckResult(
        "laplacian_h coordinate = covariant with L_a trace term",
        _worst(ev, ((calc.laplacian_h(f, fd, cd), calc.laplacian_h_cov(f, fd, cd, True))
                    for f in fns)),
        opts.tol, s, informational=True))
    report.add(CheckResult(
        "laplacian_v coordinate = covariant",
        _worst(ev, ((calc.laplacian_v(f, fd, cd), calc.laplacian_v_cov(f, fd, cd)) for f in fns)),
        opts.tol, s))

    a, b = ex.const(2 - 1j), ex.const(0.5 + 3j)
    f, h = fns[0], fns[-1]
    report.add(CheckResult(
        "laplacian_h linearity",
        _worst(ev, [(calc.laplacian_h(ex.add(ex.mul(a, f), ex.mul(b, h)), fd, cd),
                     ex.add(ex.mul(a, calc.laplacian_h(f, fd, cd)),
                            ex.mul(b, calc.laplacian_h(h, fd, cd))))]),
        1e-10, s))

    T = calc.TensorField.build(m, (1, 1, 0, 0), lambda idx: fd.h[idx[0]][idx[1]])
    pairs = []
    for gdir, barred in product(range(m), (False, True)):
        D = calc.cov_deriv_h(T, gdir, barred, cd)
        pairs.extend((c, ex.ZERO) for c in D.components)
    report.add(CheckResult("metric compatibility", _worst(ev, pairs), opts.tol, s))

    sections = _horizontal_sections(g)
    pairs = []
    for Z in sections:
        for f in fns:
            real = ex.add(f, ex.conj(f))
            Y = calc.grad_h(real, fd, cd).Zh
            G = ex.total(ex.mul(ex.mul(fd.h[al][be], Z.Zh[al]), ex.conj(Y[be]))
                         for al in range(m) for be in range(m))
            pairs.append((G, Z.apply(real, cd)))
    report.add(CheckResult("gradient duality", _worst(ev, pairs), 1e-9, s))

    worst = {}
    for Z in sections:
        for c in calc.divergence_consistency_check(Z, cd, s, opts.seed, 1e-10).checks:
            prev = worst.get(c.name)
            if prev is None or c.max_residual > prev.max_residual:
                worst[c.name] = c
    for c in worst.values():
        report.add(c)

    if g.kahler:
        pairs = []
        for Z in sections:
            simple = ex.sub(calc.nabla_trace_h(Z.Zh, cd),
                            ex.total(ex.mul(Z.Zh[al], cd.struct_trace[al]) for al in range(m)))
            pairs.append((calc.div_h(Z, cd), simple))
        report.add(CheckResult("Kaehler simplification of div^h", _worst(ev, pairs), 1e-9, s))
    return report


def _random_forms(g: Geometry, opts: CheckOptions, p: int, q: int, count: int = 5):
    sc = g.scenario
    rng = np.random.default_rng(opts.seed + 100 * p + 10 * q)
    named = [f for f in sc.forms.values() if (f.p, f.q) == (p, q)]
    return named + [fm.random_form(rng, sc.n, sc.m, p, q) for _ in range(count)]


def _form_residual(ev, F1: fm.HorizontalForm, F2: fm.HorizontalForm) -> float:
    return _worst(ev, ((F1[k], F2[k]) for k in F1.keys()))


def suite_forms(g: Geometry, opts: CheckOptions) -> ValidationReport:
    sc, fd, cd = g.scenario, g.fd, g.cd
    s = opts.samples
    ev = ex.Evaluator(sample_points(sc.n, sc.m, s, opts.seed))
    report = ValidationReport()
    degrees = [(0, 1), (1, 1)]
    for p, q in degrees:
        batch = _random_forms(g, opts, p, q)
        composed = [fm.box_h_composed(F, fd, cd) for F in batch]
        report.add(CheckResult(
            f"box_h closed form = composition ({p},{q})",
            max(_form_residual(ev, fm.box_h(F, fd, cd), C) for F, C in zip(batch, composed)),
            opts.tol, s))
        report.add(CheckResult(
            f"box_h corrected closed form = composition ({p},{q})",
            max(_form_residual(ev, fm.box_h(F, fd, cd, corrected=True), C)
                for F, C in zip(batch, composed)),
            opts.tol, s, informational=True))
        report.add(CheckResult(
            f"delbar adjoint raised route = lowered route ({p},{q})",
            max(_form_residual(ev, fm.delbar_adjoint_raised(F, fd, cd), fm.delbar_adjoint(F, fd, cd))
                for F in batch),
            opts.tol, s))
        if g.kahler:
            kahler = [fm.box_h_kahler(F, fd, cd) for F in batch]
            report.add(CheckResult(
                f"box_h = box_h_kahler ({p},{q})",
                max(_form_residual(ev, fm.box_h(F, fd, cd), K) for F, K in zip(batch, kahler)),
                opts.tol, s))
            report.add(CheckResult(
                f"box_h_kahler = composition ({p},{q})",
                max(_form_residual(ev, K, C) for K, C in zip(kahler, composed)),
                opts.tol, s, informational=True))
    return report


def _domain(g: Geometry, opts: CheckOptions) -> IntegrationDomain:
    sc = g.scenario
    hint = sc.integration
    lo, hi = opts.box or tuple(hint.get("box", (-4.0, 4.0)))
    grid = opts.grid or int(hint.get("grid", 64))
    budget = opts.budget or int(hint.get("budget", DEFAULT_BUDGET))
    return IntegrationDomain.cube(sc.n, sc.m, float(lo), float(hi), grid, budget)


def _is_flat(g: Geometry) -> bool:
    def leaves(t):
        for x in t:
            yield from (leaves(x) if isinstance(x, tuple) else (x,))
    flat = all(e.is_zero() for e in leaves((g.cd.N, g.cd.L)))
    return flat and not g.fd.det_h.free


def suite_integrals(g: Geometry, opts: CheckOptions) -> ValidationReport:
    sc = g.scenario
    report = ValidationReport()
    dom = _domain(g, opts)
    if dom.total_points > dom.budget:
        report.add(CheckResult("integral identities", 0.0, opts.integral_tol, 0, skipped=True,
                               note=f"skipped: {dom.grid}^{dom.dims} points exceeds budget "
                                    f"{dom.budget}"))
        return report
    chosen = sc.integration.get("sections")
    sections = {k: v for k, v in sc.sections.items()
                if v.is_horizontal() and (chosen is None or k in chosen)}
    for name, Z in sorted(sections.items()):
        sub = check_integral_identity(Z, sc.spec, g.fd, g.cd, dom, opts.integral_tol,
                                      samples=opts.samples, seed=opts.seed)
        for c in sub.checks:
            c.name = f"{c.name} [{name}]"
            report.add(c)
    if _is_flat(g):
        report.add(adjointness_check(g, opts, dom))
    return report


def adjointness_check(g: Geometry, opts: CheckOptions, dom: IntegrationDomain,
                      pairs: int = 3) -> CheckResult:
    """|(delbar Psi, Phi) - (Psi, delbar^* Phi)| for Gaussian-decay (0,0)/(0,1) pairs."""
    sc, fd, cd = g.scenario, g.fd, g.cd
    rng = np.random.default_rng(opts.seed + 7)
    decay = ex.exp(ex.neg(ex.total(
        [ex.mul(ex.zvar(k), ex.zvar(k, True)) for k in range(sc.n)]
        + [ex.mul(ex.uvar(a), ex.uvar(a, True)) for a in range(sc.m)])))
    worst = 0.0
    for _ in range(pairs):
        Psi = fm.random_form(rng, sc.n, sc.m, 0, 0, decay=decay)
        Phi = fm.random_form(rng, sc.n, sc.m, 0, 1, decay=decay)
        lhs = fm.global_inner_product(fm.delbar_h(Psi, cd), Phi, fd, dom)
        rhs = fm.global_inner_product(Psi, fm.delbar_adjoint(Phi, fd, cd), fd, dom)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("global adjointness of delbar^h", worst, opts.integral_tol,
                       dom.total_points)


_RUNNERS = {
    "algebroid": suite_algebroid,
    "connection": suite_connection,
    "laplace": suite_laplace,
    "forms": suite_forms,
    "integrals": suite_integrals,
}


def run_suite(name: str, g: Geometry, opts: CheckOptions) -> ValidationReport:
    try:
        return _RUNNERS[name](g, opts)
    except BudgetExceededError as exc:
        report = ValidationReport()
        report.add(CheckResult(name, 0.0, 0.0, 0, skipped=True, note=f"skipped: {exc}"))
        return report


def run_suites(names, g: Geometry, opts: CheckOptions) -> list[tuple[str, ValidationReport]]:
    return [(name, run_suite(name, g, opts)) for name in names]

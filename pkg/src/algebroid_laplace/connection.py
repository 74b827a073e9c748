"""Chern-Finsler nonlinear and linear connection, adapted frame and brackets.

Index convention for every coefficient array: the upper index comes first.
``N[c][a]`` is N^c_a, ``L[c][a][b]`` is L^c_{ab}, likewise ``C`` and ``R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from . import expr as ex
from .algebroid import AlgebroidSpec, anchor_derivative
from .finsler import FinslerData
from .report import CheckResult, ValidationReport, residual, sample_points

__all__ = ["ConnectionData", "build_connection", "delta_deriv", "vertical_deriv",
           "verify_brackets", "is_kahler", "check_connection_identities"]


def _u(a: int, barred: bool = False) -> ex.Var:
    return ex.Var("u", a, barred)


def vertical_deriv(e: ex.Expr, a: int, barred: bool = False) -> ex.Expr:
    """d/du^a (or d/du^abar)."""
    return ex.diff(e, _u(a, barred))


@dataclass(eq=False)
class ConnectionData:
    spec: AlgebroidSpec
    fd: FinslerData
    N: tuple
    L: tuple = ()
    C: tuple = ()
    R: tuple = ()
    L_trace: tuple = ()      # L_a = L^b_ab - L^b_ba
    C_trace: tuple = ()      # C_a = C^b_ab
    struct_trace: tuple = ()  # sum_b structure C^b_ab
    _delta_cache: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.spec.m

    def N_bar(self, c: int, a: int) -> ex.Expr:
        """N^{cbar}_{abar}, the conjugate coefficient."""
        return ex.conj(self.N[c][a])

    def delta(self, e: ex.Expr, a: int, barred: bool = False) -> ex.Expr:
        key = (e, a, barred)
        hit = self._delta_cache.get(key)
        if hit is None:
            coeff = self.N_bar if barred else (lambda c, a_: self.N[c][a_])
            hit = ex.sub(
                anchor_derivative(self.spec, e, a, barred),
                ex.total(ex.mul(coeff(c, a), vertical_deriv(e, c, barred)) for c in range(self.m)),
            )
            self._delta_cache[key] = hit
        return hit

    def L_coeff(self, c: int, a: int, b: int, barred: bool = False) -> ex.Expr:
        return ex.conj(self.L[c][a][b]) if barred else self.L[c][a][b]

    def C_coeff(self, c: int, a: int, b: int, barred: bool = False) -> ex.Expr:
        return ex.conj(self.C[c][a][b]) if barred else self.C[c][a][b]


def delta_deriv(e: ex.Expr, a: int, barred: bool, cd: ConnectionData) -> ex.Expr:
    """Adapted horizontal derivative delta_a e = d_a e - N^b_a d(e)/du^b."""
    if not 0 <= a < cd.m:
        raise IndexError(f"frame index {a} out of range")
    return cd.delta(e, a, barred)


def build_connection(spec: AlgebroidSpec, fd: FinslerData) -> ConnectionData:
    m = spec.m
    F_ubar = [ex.diff(fd.F, _u(s, True)) for s in range(m)]
    N = tuple(
        tuple(
            ex.total(ex.mul(fd.h_inv[s][c], anchor_derivative(spec, F_ubar[s], a)) for s in range(m))
            for a in range(m)
        )
        for c in range(m)
    )
    cd = ConnectionData(spec, fd, N)
    rng = range(m)
    cd.L = tuple(tuple(tuple(
        ex.total(ex.mul(fd.h_inv[s][c], cd.delta(fd.h[a][s], b)) for s in rng)
        for b in rng) for a in rng) for c in rng)
    cd.C = tuple(tuple(tuple(
        ex.total(ex.mul(fd.h_inv[s][c], vertical_deriv(fd.h[a][s], b)) for s in rng)
        for b in rng) for a in rng) for c in rng)
    cd.R = tuple(tuple(tuple(
        ex.add(
            ex.total(ex.mul(spec.structure_fn(e, a, b), N[c][e]) for e in rng),
            ex.sub(cd.delta(N[c][a], b), cd.delta(N[c][b], a)),
        )
        for b in rng) for a in rng) for c in rng)
    cd.L_trace = tuple(
        ex.total(ex.sub(cd.L[b][a][b], cd.L[b][b][a]) for b in rng) for a in rng)
    cd.C_trace = tuple(ex.total(cd.C[b][a][b] for b in rng) for a in rng)
    cd.struct_trace = tuple(spec.structure_trace(a) for a in rng)
    return cd


# ---------------------------------------------------------------- brackets

def _X(cd, a, barred):
    return lambda f: cd.delta(f, a, barred)


def _V(a, barred):
    return lambda f: vertical_deriv(f, a, barred)


def _commutator(A, B, f):
    return ex.sub(A(B(f)), B(A(f)))


def _bracket_rows(cd: ConnectionData):
    """(name, lhs builder, rhs builder) for every row of the adapted-frame brackets."""
    spec, m = cd.spec, cd.m
    rng = range(m)

    def xx(a, b, f):
        return ex.total(
            [ex.mul(spec.structure_fn(c, a, b), cd.delta(f, c)) for c in rng]
            + [ex.mul(cd.R[c][a][b], vertical_deriv(f, c)) for c in rng])

    def xxbar(a, b, f):
        return ex.total(
            [ex.mul(cd.delta(cd.N[c][a], b, True), vertical_deriv(f, c)) for c in rng]
            + [ex.neg(ex.mul(cd.delta(cd.N_bar(c, b), a), vertical_deriv(f, c, True)))
               for c in rng])

    def xv(a, b, f):
        return ex.total(ex.mul(vertical_deriv(cd.N[c][a], b), vertical_deriv(f, c)) for c in rng)

    def xvbar(a, b, f):
        return ex.total(ex.mul(vertical_deriv(cd.N[c][a], b, True), vertical_deriv(f, c))
                        for c in rng)

    zero = lambda a, b, f: ex.ZERO  # noqa: E731
    return [
        ("[X_a,X_b]", lambda a, b: (_X(cd, a, False), _X(cd, b, False)), xx),
        ("[X_a,X_bbar]", lambda a, b: (_X(cd, a, False), _X(cd, b, True)), xxbar),
        ("[X_a,V_b]", lambda a, b: (_X(cd, a, False), _V(b, False)), xv),
        ("[X_a,V_bbar]", lambda a, b: (_X(cd, a, False), _V(b, True)), xvbar),
        ("[V_a,V_b]", lambda a, b: (_V(a, False), _V(b, False)), zero),
        ("[V_a,V_bbar]", lambda a, b: (_V(a, False), _V(b, True)), zero),
    ]


def verify_brackets(spec: AlgebroidSpec, cd: ConnectionData, testfns, samples: int = 20,
                    seed: int = 42, tol: float = 1e-8,
                    point: ex.EvalPoint | None = None) -> ValidationReport:
    """Commutators of the frame operators against the bracket coefficient formulas."""
    testfns = list(testfns)
    if not testfns:
        raise ValueError("need at least one test function")
    if point is None:
        point = sample_points(spec.n, spec.m, samples, seed)
    ev = ex.Evaluator(point)
    report = ValidationReport()
    for name, ops, rhs in _bracket_rows(cd):
        worst = 0.0
        for a, b in product(range(spec.m), repeat=2):
            A, B = ops(a, b)
            for f in testfns:
                worst = max(worst, residual(ev.full(_commutator(A, B, f)), ev.full(rhs(a, b, f))))
        report.add(CheckResult(f"bracket {name}", worst, tol, samples))
    return report


# ------------------------------------------------------------ identities

def kahler_residual(cd: ConnectionData, point: ex.EvalPoint) -> float:
    ev = ex.Evaluator(point)
    rng = range(cd.m)
    worst = 0.0
    for s, a, g in product(rng, rng, rng):
        if a < g:
            worst = max(worst, residual(ev.full(cd.L[s][a][g]), ev.full(cd.L[s][g][a])))
    return worst


def is_kahler(cd: ConnectionData, samples: int = 20, seed: int = 42, tol: float = 1e-9) -> bool:
    """L^s_ag == L^s_ga at every sample and index."""
    return kahler_residual(cd, sample_points(cd.spec.n, cd.m, samples, seed)) <= tol


def check_connection_identities(cd: ConnectionData, samples: int = 20, seed: int = 42,
                                tol: float = 1e-8, homogeneous: bool = True) -> ValidationReport:
    """Symmetry of C, L = d(N)/du, trace identities, antisymmetry of R and [delta, d/du]."""
    spec, fd, m = cd.spec, cd.fd, cd.m
    rng = range(m)
    point = sample_points(spec.n, m, samples, seed)
    ev = ex.Evaluator(point)
    report = ValidationReport()

    def worst(pairs):
        return max((residual(ev.full(a), ev.full(b)) for a, b in pairs), default=0.0)

    report.add(CheckResult(
        "C symmetric in lower indices",
        worst((cd.C[c][a][b], cd.C[c][b][a]) for c, a, b in product(rng, rng, rng)),
        tol, samples))

    if homogeneous:
        r = worst((cd.L[c][a][b], vertical_deriv(cd.N[c][b], a))
                  for c, a, b in product(rng, rng, rng))
        check = report.add(CheckResult("L^c_ab = d(N^c_b)/du^a", r, tol, samples))
        if not check.passed:
            rt = worst((cd.L[c][a][b], vertical_deriv(cd.N[c][a], b))
                       for c, a, b in product(rng, rng, rng))
            report.add(CheckResult("L^c_ab = d(N^c_a)/du^b (transposed reading)", rt, tol,
                                   samples, informational=True))
    else:
        report.add(CheckResult("L^c_ab = d(N^c_b)/du^a", 0.0, tol, samples, skipped=True,
                               note="skipped: inhomogeneous"))

    log_det = ex.log(fd.det_h)
    report.add(CheckResult(
        "L^b_ba = delta_a(ln h)",
        worst((ex.total(cd.L[b][b][a] for b in rng), cd.delta(log_det, a)) for a in rng),
        tol, samples))
    report.add(CheckResult(
        "C^b_ba = d(ln h)/du^a",
        worst((ex.total(cd.C[b][b][a] for b in rng), vertical_deriv(log_det, a)) for a in rng),
        tol, samples))
    report.add(CheckResult(
        "R antisymmetric",
        worst((cd.R[c][a][b], ex.neg(cd.R[c][b][a])) for c, a, b in product(rng, rng, rng)),
        1e-10, samples))
    return report

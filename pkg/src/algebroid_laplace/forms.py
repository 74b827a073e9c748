"""Horizontal (p, q)-forms, their differentials, the adjoint of delbar^h and box^h.

Multi-indices are 0-based tuples.  A form stores one coefficient per pair of
strictly increasing multi-indices (A, B); ``Phi[A, B]`` accepts any order and
returns the antisymmetrized value.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from . import expr as ex
from .calculus import TensorField, cov_deriv_h
from .connection import ConnectionData
from .finsler import FinslerData
from .quadrature import IntegrationDomain, integrate

__all__ = [
    "HorizontalForm", "DegreeError", "inner_product_pointwise", "global_inner_product",
    "del_h", "delbar_h", "delbar_adjoint", "delbar_adjoint_raised", "del_adjoint",
    "conjugate_form", "box_h", "box_h_composed", "box_h_kahler", "random_form",
]


class DegreeError(ValueError):
    pass


def _sort_sign(idx):
    """(sorted tuple, sign) or (None, 0) when an index repeats."""
    if len(set(idx)) != len(idx):
        return None, 0
    idx = list(idx)
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return tuple(idx), sign


@dataclass(frozen=True, eq=False)
class HorizontalForm:
    m: int
    p: int
    q: int
    coeffs: dict

    def __post_init__(self):
        if not (0 <= self.p <= self.m and 0 <= self.q <= self.m):
            raise DegreeError(f"degree ({self.p}, {self.q}) impossible for rank {self.m}")
        for A, B in self.coeffs:
            for idx, k in ((A, self.p), (B, self.q)):
                if len(idx) != k or any(not 0 <= i < self.m for i in idx) \
                        or list(idx) != sorted(set(idx)):
                    raise ValueError(f"bad multi-index {idx} for degree ({self.p}, {self.q})")
        object.__setattr__(self, "coeffs",
                           {k: v for k, v in self.coeffs.items() if not v.is_zero()})

    @classmethod
    def build(cls, m: int, p: int, q: int, fn) -> "HorizontalForm":
        """Form whose coefficient on increasing (A, B) is ``fn(A, B)``."""
        if not (0 <= p <= m and 0 <= q <= m):
            raise DegreeError(f"degree ({p}, {q}) impossible for rank {m}")
        return cls(m, p, q, {(A, B): fn(A, B) for A, B in _increasing(m, p, q)})

    @classmethod
    def scalar(cls, m: int, f: ex.Expr) -> "HorizontalForm":
        return cls(m, 0, 0, {((), ()): f})

    def __getitem__(self, key) -> ex.Expr:
        A, B = key
        sa, ka = _sort_sign(A)
        sb, kb = _sort_sign(B)
        if ka == 0 or kb == 0:
            return ex.ZERO
        c = self.coeffs.get((sa, sb), ex.ZERO)
        return c if ka * kb > 0 else ex.neg(c)

    def keys(self):
        return _increasing(self.m, self.p, self.q)

    def to_tensor(self) -> TensorField:
        """All components, variance (p, q, 0, 0)."""
        p = self.p
        return TensorField.build(self.m, (p, self.q, 0, 0), lambda idx: self[idx[:p], idx[p:]])

    def map(self, fn) -> "HorizontalForm":
        return HorizontalForm(self.m, self.p, self.q, {k: fn(v) for k, v in self.coeffs.items()})


def _increasing(m, p, q):
    return list(product(combinations(range(m), p), combinations(range(m), q)))


def _from_tensor(T: TensorField, p: int, q: int) -> HorizontalForm:
    return HorizontalForm.build(T.m, p, q, lambda A, B: T[A + B])


# ------------------------------------------------------------- raising

def _raised(Phi: HorizontalForm, fd: FinslerData, A, B) -> ex.Expr:
    """phi^{Abar B} = phi_{mu.. nubar..} h^{abar mu}.. h^{nubar b}.."""
    m = Phi.m
    terms = []
    for mus in product(range(m), repeat=Phi.p):
        for nus in product(range(m), repeat=Phi.q):
            c = Phi[mus, nus]
            if c.is_zero():
                continue
            factors = [c]
            factors += [fd.h_inv[a][mu] for a, mu in zip(A, mus)]
            factors += [fd.h_inv[nu][b] for nu, b in zip(nus, B)]
            terms.append(ex.product(factors))
    return ex.total(terms)


def _lowered(m: int, p: int, q: int, upper, fd: FinslerData, A, B) -> ex.Expr:
    """Inverse of ``_raised`` for a component function ``upper(Abar, B)``."""
    terms = []
    for als in product(range(m), repeat=p):
        for bes in product(range(m), repeat=q):
            c = upper(als, bes)
            if c.is_zero():
                continue
            factors = [c]
            factors += [fd.h[mu][a] for mu, a in zip(A, als)]
            factors += [fd.h[b][nu] for nu, b in zip(B, bes)]
            terms.append(ex.product(factors))
    return ex.total(terms)


def inner_product_pointwise(Psi: HorizontalForm, Phi: HorizontalForm, fd: FinslerData) -> ex.Expr:
    """sum over increasing (A, B) of psi_{A Bbar} conj(phi^{Abar B})."""
    if (Psi.p, Psi.q) != (Phi.p, Phi.q):
        raise DegreeError(f"degree mismatch ({Psi.p}, {Psi.q}) vs ({Phi.p}, {Phi.q})")
    terms = []
    for A, B in Psi.keys():
        c = Psi[A, B]
        if not c.is_zero():
            terms.append(ex.mul(c, ex.conj(_raised(Phi, fd, A, B))))
    return ex.total(terms)


def global_inner_product(Psi: HorizontalForm, Phi: HorizontalForm, fd: FinslerData,
                         dom: IntegrationDomain) -> complex:
    return integrate(inner_product_pointwise(Psi, Phi, fd), ex.power(fd.det_h, 2), dom)


# -------------------------------------------------------- differentials

def del_h(Psi: HorizontalForm, cd: ConnectionData) -> HorizontalForm:
    if Psi.p >= Psi.m:
        raise DegreeError("del_h would exceed the top unbarred degree")

    def coeff(A, B):
        return ex.total(
            ex.mul(ex.const((-1) ** i), cd.delta(Psi[A[:i] + A[i + 1:], B], A[i]))
            for i in range(len(A)))
    return HorizontalForm.build(Psi.m, Psi.p + 1, Psi.q, coeff)


def delbar_h(Psi: HorizontalForm, cd: ConnectionData) -> HorizontalForm:
    if Psi.q >= Psi.m:
        raise DegreeError("delbar_h would exceed the top barred degree")
    sign = (-1) ** Psi.p

    def coeff(A, B):
        return ex.total(
            ex.mul(ex.const(sign * (-1) ** i), cd.delta(Psi[A, B[:i] + B[i + 1:]], B[i], True))
            for i in range(len(B)))
    return HorizontalForm.build(Psi.m, Psi.p, Psi.q + 1, coeff)


def delbar_adjoint(Phi: HorizontalForm, fd: FinslerData, cd: ConnectionData) -> HorizontalForm:
    """(-1)^{p+1} h^{ebar g} delta_g(phi_{A ebar B'}), lowering q by one."""
    if Phi.q == 0:
        raise DegreeError("delbar adjoint needs q >= 1")
    m, sign = Phi.m, ex.const((-1) ** (Phi.p + 1))

    def coeff(A, B):
        return ex.mul(sign, ex.total(
            ex.mul(fd.h_inv[e][g], cd.delta(Phi[A, (e,) + B], g))
            for e in range(m) for g in range(m)))
    return HorizontalForm.build(m, Phi.p, Phi.q - 1, coeff)


def delbar_adjoint_raised(Phi: HorizontalForm, fd: FinslerData,
                          cd: ConnectionData) -> HorizontalForm:
    """Second route: -(-1)^p h^-2 delta_b(phi^{Abar b B'} h^2) in raised indices, then lowered."""
    if Phi.q == 0:
        raise DegreeError("delbar adjoint needs q >= 1")
    m, p, q = Phi.m, Phi.p, Phi.q
    h2 = ex.power(fd.det_h, 2)
    sign = ex.const(-((-1) ** p))
    cache = {}

    def upper(als, bes):
        key = (als, bes)
        if key not in cache:
            inner = ex.total(cd.delta(ex.mul(_raised(Phi, fd, als, (b,) + bes), h2), b)
                             for b in range(m))
            cache[key] = ex.mul(sign, ex.div(inner, h2))
        return cache[key]

    return HorizontalForm.build(m, p, q - 1,
                                lambda A, B: _lowered(m, p, q - 1, upper, fd, A, B))


def conjugate_form(Psi: HorizontalForm) -> HorizontalForm:
    """conj(psi_{A Bbar} Z^A ^ Z^Bbar) as a (q, p)-form."""
    sign = (-1) ** (Psi.p * Psi.q)
    return HorizontalForm(Psi.m, Psi.q, Psi.p, {
        (B, A): ex.mul(ex.const(sign), ex.conj(c)) for (A, B), c in Psi.coeffs.items()})


def del_adjoint(Psi: HorizontalForm, fd: FinslerData, cd: ConnectionData) -> HorizontalForm:
    """conj(delbar^* conj(Psi)); lowers p by one."""
    if Psi.p == 0:
        raise DegreeError("del adjoint needs p >= 1")
    return conjugate_form(delbar_adjoint(conjugate_form(Psi), fd, cd))


# ---------------------------------------------------------------- box

def _commutator(cd: ConnectionData, g: int, b: int, f: ex.Expr) -> ex.Expr:
    """[delta_g, delta_bbar] f as an operator commutator."""
    return ex.sub(cd.delta(cd.delta(f, b, True), g), cd.delta(cd.delta(f, g), b, True))


def box_h(Phi: HorizontalForm, fd: FinslerData, cd: ConnectionData,
          corrected: bool = False) -> HorizontalForm:
    """Closed-form box^h with commutators of the adapted frame.

    The closed form drops the derivative of h^{ebar g} that appears when
    delbar^h acts on delbar^* Phi.  ``corrected=True`` adds back
    -sum_i (-1)^(i-1) delta_{b_i bar}(h^{ebar g}) delta_g(phi_{A ebar B_i'}),
    which makes the result equal to ``box_h_composed``.
    """
    m = Phi.m

    def coeff(A, B):
        terms = []
        for e, g in product(range(m), repeat=2):
            inner = [cd.delta(cd.delta(Phi[A, B], e, True), g)]
            for i, b in enumerate(B):
                rest = Phi[A, (e,) + B[:i] + B[i + 1:]]
                inner.append(ex.mul(ex.const(-((-1) ** i)), _commutator(cd, g, b, rest)))
            terms.append(ex.neg(ex.mul(fd.h_inv[e][g], ex.total(inner))))
            if corrected:
                for i, b in enumerate(B):
                    rest = Phi[A, (e,) + B[:i] + B[i + 1:]]
                    terms.append(ex.mul(ex.const(-((-1) ** i)),
                                        ex.mul(cd.delta(fd.h_inv[e][g], b, True),
                                               cd.delta(rest, g))))
        return ex.total(terms)
    return HorizontalForm.build(m, Phi.p, Phi.q, coeff)


def _add_forms(a: HorizontalForm, b: HorizontalForm) -> HorizontalForm:
    keys = set(a.coeffs) | set(b.coeffs)
    return HorizontalForm(a.m, a.p, a.q, {k: ex.add(a.coeffs.get(k, ex.ZERO),
                                                    b.coeffs.get(k, ex.ZERO)) for k in keys})


def box_h_composed(Phi: HorizontalForm, fd: FinslerData, cd: ConnectionData) -> HorizontalForm:
    """delbar^h delbar^* Phi + delbar^* delbar^h Phi; terms leaving the degree range are zero."""
    out = HorizontalForm(Phi.m, Phi.p, Phi.q, {})
    if Phi.q >= 1:
        out = _add_forms(out, delbar_h(delbar_adjoint(Phi, fd, cd), cd))
    if Phi.q < Phi.m:
        out = _add_forms(out, delbar_adjoint(delbar_h(Phi, cd), fd, cd))
    return out


def _nabla2(T: TensorField, cd: ConnectionData, first, second):
    """nabla_second(nabla_first T) with the extra slot of nabla_first T tracked.

    ``first`` and ``second`` are (direction, barred).  Returns a function of a
    component index of T.
    """
    p, q, r, s = T.variance
    d1, b1 = first
    firsts = [cov_deriv_h(T, g, b1, cd) for g in range(T.m)]
    # new covariant slot goes first in its block
    var = (p + 1, q, r, s) if not b1 else (p, q + 1, r, s)
    pos = 0 if not b1 else p

    def comp(idx):
        g = idx[pos]
        return firsts[g][idx[:pos] + idx[pos + 1:]]
    S = TensorField.build(T.m, var, comp)
    d2, b2 = second
    outer = cov_deriv_h(S, d2, b2, cd)
    return lambda idx: outer[idx[:pos] + (d1,) + idx[pos:]]


def box_h_kahler(Phi: HorizontalForm, fd: FinslerData, cd: ConnectionData) -> HorizontalForm:
    """-h^{ebar g} nabla_g nabla_ebar phi + sum_i h^{ebar g}[nabla_g, nabla_{b_i bar}] phi_{A ebar ..}.

    Intended for Kaehler data; computed regardless.
    """
    m, p = Phi.m, Phi.p
    T = Phi.to_tensor()
    cache = {}

    def second(first, sec):
        if (first, sec) not in cache:
            cache[(first, sec)] = _nabla2(T, cd, first, sec)
        return cache[(first, sec)]

    def coeff(A, B):
        terms = []
        for e, g in product(range(m), repeat=2):
            hinv = fd.h_inv[e][g]
            terms.append(ex.neg(ex.mul(hinv, second((e, True), (g, False))(A + B))))
            for i, b in enumerate(B):
                idx = A + (e,) + B[:i] + B[i + 1:]
                comm = ex.sub(second((b, True), (g, False))(idx),
                              second((g, False), (b, True))(idx))
                terms.append(ex.mul(hinv, comm))
        return ex.total(terms)
    return HorizontalForm.build(m, p, Phi.q, coeff)


# ------------------------------------------------------------- random

def random_form(rng: np.random.Generator, n: int, m: int, p: int, q: int, degree: int = 2,
                terms: int = 3, decay: ex.Expr | None = None) -> HorizontalForm:
    """Random polynomial coefficients in z, zbar, u, ubar (optionally times ``decay``)."""
    vars_ = ([ex.zvar(k, b) for k in range(n) for b in (False, True)]
             + [ex.uvar(a, b) for a in range(m) for b in (False, True)])

    def coeff(A, B):
        out = []
        for _ in range(terms):
            c = complex(rng.integers(-3, 4), rng.integers(-3, 4))
            mono = [ex.const(c)]
            for _ in range(int(rng.integers(0, degree + 1))):
                mono.append(vars_[int(rng.integers(len(vars_)))])
            out.append(ex.product(mono))
        poly = ex.total(out)
        return ex.mul(poly, decay) if decay is not None else poly
    return HorizontalForm.build(m, p, q, coeff)

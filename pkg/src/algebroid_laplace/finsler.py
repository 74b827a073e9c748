"""Finsler metric pipeline: fiber Hessian, symbolic inverse and determinant."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import expr as ex
from .algebroid import AlgebroidSpec
from .report import annulus_samples, sample_points

__all__ = ["FinslerData", "FinslerError", "build_finsler", "check_homogeneity",
           "check_pseudoconvexity", "MAX_RANK"]

MAX_RANK = 4


class FinslerError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FinslerData:
    """``h[a][b]`` is h_{a bbar}; ``h_inv[s][b]`` is h^{sbar b}, so that
    sum_s h_inv[s][b] * h[a][s] = delta_ab.
    """

    F: ex.Expr
    h: tuple[tuple[ex.Expr, ...], ...]
    h_inv: tuple[tuple[ex.Expr, ...], ...]
    det_h: ex.Expr

    @property
    def m(self) -> int:
        return len(self.h)


def _perm_sign(p) -> int:
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def _det(rows) -> ex.Expr:
    k = len(rows)
    if k == 0:
        return ex.ONE
    terms = []
    for p in permutations(range(k)):
        factors = [rows[i][p[i]] for i in range(k)]
        if any(f.is_zero() for f in factors):
            continue
        t = ex.product(factors)
        terms.append(t if _perm_sign(p) > 0 else ex.neg(t))
    return ex.total(terms)


def _minor(rows, i, j):
    return [[rows[r][c] for c in range(len(rows)) if c != j] for r in range(len(rows)) if r != i]


def build_finsler(spec: AlgebroidSpec, F: ex.Expr) -> FinslerData:
    """Metric h_{a bbar} = d^2 F / du^a du^bbar with adjugate inverse."""
    m = spec.m
    if m > MAX_RANK:
        raise FinslerError(f"fiber rank {m} exceeds the symbolic-inverse cap of {MAX_RANK}")
    for v in F.free:
        if (v.kind == "z" and v.index >= spec.n) or (v.kind == "u" and v.index >= m):
            raise FinslerError(f"F uses {v}, outside dimensions n={spec.n}, m={m}")
    h = tuple(
        tuple(ex.diff(ex.diff(F, ex.Var("u", a)), ex.Var("u", b, True)) for b in range(m))
        for a in range(m)
    )
    det = _det(h)
    if det.is_zero():
        raise FinslerError("metric determinant is structurally zero")
    # (H^-1)[s][b] = cofactor(b, s) / det
    h_inv = tuple(
        tuple(
            ex.div(ex.mul(ex.const((-1) ** (s + b)), _det(_minor(h, b, s))), det)
            for b in range(m)
        )
        for s in range(m)
    )
    return FinslerData(F, h, h_inv, det)


def check_homogeneity(spec: AlgebroidSpec, F: ex.Expr, samples: int = 20, seed: int = 42,
                      tol: float = 1e-9) -> bool:
    """F(z, lam u) == |lam|^2 F(z, u) at seeded random (z, u, lam)."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    point = sample_points(spec.n, spec.m, samples, seed)
    lam = annulus_samples(np.random.default_rng(seed + 1), samples)
    base = ex.evaluate(F, point)
    scaled = ex.evaluate(F, ex.EvalPoint(point.z, tuple(lam * u for u in point.u)))
    res = np.abs(scaled - np.abs(lam) ** 2 * base)
    return bool(np.all(res <= tol * (1 + np.abs(base))))


def metric_at(fd: FinslerData, point: ex.EvalPoint) -> np.ndarray:
    """Numeric h with shape batch + (m, m)."""
    ev = ex.Evaluator(point)
    m = fd.m
    mats = [[ev.full(fd.h[a][b]) for b in range(m)] for a in range(m)]
    return np.moveaxis(np.array(mats), (0, 1), (-2, -1))


def check_pseudoconvexity(spec: AlgebroidSpec, fd: FinslerData, samples: int = 20,
                          seed: int = 42, tol: float = 1e-10) -> bool:
    """h is Hermitian and positive definite (smallest eigenvalue > tol) at samples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    H = metric_at(fd, sample_points(spec.n, spec.m, samples, seed))
    herm_err = np.abs(H - np.conj(np.swapaxes(H, -1, -2)))
    if np.any(herm_err > tol * (1 + np.abs(H))):
        return False
    eig = np.linalg.eigvalsh(H)
    return bool(np.all(eig[..., 0] > tol))

"""Holomorphic Lie algebroids in a fixed local frame.

Indices are 0-based throughout the Python API.  The anchor is stored as an
``m x n`` matrix ``anchor[a][k]`` = coefficient of d/dz^k in rho(e_a); the
structure functions are stored only for ``a < b`` and completed
antisymmetrically on read.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import expr as ex
from .report import CheckResult, ValidationReport, abs_residual, sample_points

__all__ = ["AlgebroidSpec", "anchor_derivative", "validate_algebroid"]


@dataclass(frozen=True, eq=False)
class AlgebroidSpec:
    n: int
    m: int
    anchor: tuple[tuple[ex.Expr, ...], ...]
    structure: dict[tuple[int, int, int], ex.Expr] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("dimensions must be positive")
        if len(self.anchor) != self.m or any(len(row) != self.n for row in self.anchor):
            raise ValueError(f"anchor must be an {self.m}x{self.n} matrix")
        for (c, a, b), e in self.structure.items():
            if not (0 <= c < self.m and 0 <= a < self.m and 0 <= b < self.m):
                raise ValueError(f"structure index {(c, a, b)} out of range for m={self.m}")
            if not a < b:
                raise ValueError(f"structure entries need alpha < beta, got {(a, b)}")
        for e in self._entries():
            for v in e.free:
                if v.kind != "z" or v.index >= self.n:
                    raise ValueError(f"anchor/structure entries may depend on z only, found {v}")
        object.__setattr__(self, "structure",
                           {k: v for k, v in self.structure.items() if not v.is_zero()})

    def _entries(self):
        yield from (e for row in self.anchor for e in row)
        yield from self.structure.values()

    def rho(self, a: int, k: int, barred: bool = False) -> ex.Expr:
        """rho^k_a, or its conjugate rho^{k bar}_{a bar} when ``barred``."""
        e = self.anchor[a][k]
        return ex.conj(e) if barred else e

    def structure_fn(self, c: int, a: int, b: int) -> ex.Expr:
        """Structure function with upper index ``c``: [e_a, e_b] = C^c_ab e_c."""
        if a == b:
            return ex.ZERO
        if a < b:
            return self.structure.get((c, a, b), ex.ZERO)
        return ex.neg(self.structure.get((c, b, a), ex.ZERO))

    def structure_trace(self, a: int) -> ex.Expr:
        """sum_b C^b_ab."""
        return ex.total(self.structure_fn(b, a, b) for b in range(self.m))

    def anchor_divergence(self, a: int) -> ex.Expr:
        """sum_k d rho^k_a / dz^k (Euclidean divergence of rho(e_a) on the base)."""
        return ex.total(ex.diff(self.anchor[a][k], ex.Var("z", k)) for k in range(self.n))


def anchor_derivative(spec: AlgebroidSpec, e: ex.Expr, a: int, barred: bool = False) -> ex.Expr:
    """Apply rho(e_a) = rho^k_a d/dz^k to ``e`` (conjugated operator when ``barred``)."""
    if not 0 <= a < spec.m:
        raise IndexError(f"frame index {a} out of range")
    return ex.total(
        ex.mul(spec.rho(a, k, barred), ex.diff(e, ex.Var("z", k, barred)))
        for k in range(spec.n)
    )


def validate_algebroid(spec: AlgebroidSpec, samples: int = 20, seed: int = 42,
                       tol: float = 1e-12, point: ex.EvalPoint | None = None) -> ValidationReport:
    """Check holomorphy, anchor/bracket compatibility and the Jacobi identity.

    Residuals are absolute.  ``point`` overrides the seeded random batch.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    report = ValidationReport()
    bad = [str(e) for e in spec._entries() if not ex.is_holomorphic(e)]
    report.add(CheckResult("holomorphy", float(len(bad)), 0.0, samples=0,
                           note="non-holomorphic: " + ", ".join(bad) if bad else ""))

    if point is None:
        point = sample_points(spec.n, spec.m, samples, seed)
    else:
        samples = int(np.size(point.z[0])) if point.z else 1
    ev = ex.Evaluator(point)
    m, n = spec.m, spec.n

    # rho_a(rho^k_b) - rho_b(rho^k_a) - C^c_ab rho^k_c
    worst = 0.0
    for a, b in ((a, b) for a in range(m) for b in range(a + 1, m)):
        for k in range(n):
            lhs = ex.sub(anchor_derivative(spec, spec.anchor[b][k], a),
                         anchor_derivative(spec, spec.anchor[a][k], b))
            rhs = ex.total(ex.mul(spec.structure_fn(c, a, b), spec.anchor[c][k]) for c in range(m))
            worst = max(worst, abs_residual(ev.full(ex.sub(lhs, rhs))))
    report.add(CheckResult("anchor compatibility", worst, tol, samples))

    # cyclic sum of rho_a(C^t_bc) + C^e_bc C^t_ae
    worst = 0.0
    for a, b, c in product(range(m), repeat=3):
        for t in range(m):
            terms = []
            for x, y, w in ((a, b, c), (b, c, a), (c, a, b)):
                terms.append(anchor_derivative(spec, spec.structure_fn(t, y, w), x))
                terms.extend(ex.mul(spec.structure_fn(e, y, w), spec.structure_fn(t, x, e))
                             for e in range(m))
            worst = max(worst, abs_residual(ev.full(ex.total(terms))))
    report.add(CheckResult("jacobi", worst, tol, samples))
    return report

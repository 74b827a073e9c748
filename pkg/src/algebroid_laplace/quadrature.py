"""Midpoint-rule tensor-grid integration over a (z, u) coordinate box."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .algebroid import AlgebroidSpec
from .calculus import SectionField, TensorField, WrongBlockError, cov_deriv_h, volume_density
from .connection import ConnectionData, is_kahler
from .finsler import FinslerData
from .report import CheckResult, ValidationReport

__all__ = ["IntegrationDomain", "BudgetExceededError", "DEFAULT_BUDGET", "integrate",
           "check_integral_identity", "grid_refinement_check"]

DEFAULT_BUDGET = 2 ** 24
_CHUNK_POINTS = 2 ** 21


class BudgetExceededError(ValueError):
    pass


@dataclass(frozen=True)
class IntegrationDomain:
    """Box in real coordinates ordered (re z, im z, re u, im u), each block by index."""

    n: int
    m: int
    bounds: tuple[tuple[float, float], ...]
    grid: int = 64
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if len(self.bounds) != 2 * (self.n + self.m):
            raise ValueError(f"need {2 * (self.n + self.m)} (lower, upper) pairs")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bad bounds ({lo}, {hi})")
        if self.grid < 8:
            raise ValueError("grid must have at least 8 points per axis")

    @classmethod
    def cube(cls, n: int, m: int, lo: float, hi: float, grid: int = 64,
             budget: int = DEFAULT_BUDGET) -> "IntegrationDomain":
        return cls(n, m, ((lo, hi),) * (2 * (n + m)), grid, budget)

    @property
    def dims(self) -> int:
        return len(self.bounds)

    @property
    def total_points(self) -> int:
        return self.grid ** self.dims

    def refined(self, factor: int = 2) -> "IntegrationDomain":
        return IntegrationDomain(self.n, self.m, self.bounds, self.grid * factor, self.budget)

    def axes(self):
        """Midpoints and step for every real axis."""
        out = []
        for lo, hi in self.bounds:
            step = (hi - lo) / self.grid
            out.append((lo + step * (np.arange(self.grid) + 0.5), step))
        return out


def _grid_point(dom: IntegrationDomain, mids, first_axis_values) -> ex.EvalPoint:
    """Broadcastable EvalPoint; axis k of the batch is real axis k of the box.

    Sub-expressions depending only on some coordinates stay small, which is
    where most of the speed comes from.
    """
    d = dom.dims
    coords = []
    for k in range(d):
        vals = first_axis_values if k == 0 else mids[k]
        shape = [1] * d
        shape[k] = len(vals)
        coords.append(np.asarray(vals, dtype=float).reshape(shape))
    n, m = dom.n, dom.m
    z = tuple(coords[k] + 1j * coords[n + k] for k in range(n))
    u = tuple(coords[2 * n + a] + 1j * coords[2 * n + m + a] for a in range(m))
    return ex.EvalPoint(z, u)


def _check_budget(dom: IntegrationDomain):
    if dom.total_points > dom.budget:
        raise BudgetExceededError(
            f"{dom.grid}^{dom.dims} = {dom.total_points} points exceeds budget {dom.budget}")


def integrate(f: ex.Expr, weight: ex.Expr, dom: IntegrationDomain) -> complex:
    """Midpoint rule for the integral of f * weight over ``dom``.

    Chunks run along the first real axis in a fixed order; each chunk is
    summed with numpy and the partial sums combined with math.fsum, so the
    result does not depend on anything but the inputs.
    """
    _check_budget(dom)
    for v in f.free | weight.free:
        if (v.kind == "z" and v.index >= dom.n) or (v.kind == "u" and v.index >= dom.m):
            raise ValueError(f"{v} is outside the domain dimensions")
    integrand = ex.mul(f, weight)
    axes = dom.axes()
    mids = [a for a, _ in axes]
    cell = math.prod(s for _, s in axes)
    slab = dom.grid ** (dom.dims - 1)
    rows = max(1, _CHUNK_POINTS // slab)
    re_parts, im_parts = [], []
    for start in range(0, dom.grid, rows):
        point = _grid_point(dom, mids, mids[0][start:start + rows])
        vals = ex.Evaluator(point).full(integrand)
        total = complex(np.sum(vals))
        re_parts.append(total.real)
        im_parts.append(total.imag)
    return complex(math.fsum(re_parts), math.fsum(im_parts)) * cell


def _boundary_ratio(Z: SectionField, dom: IntegrationDomain, points: int = 17) -> float:
    """max |Z| on the box faces relative to max |Z| on a coarse grid including the faces."""
    comps = [c for c in Z.Zh if not c.is_zero()]
    if not comps:
        return 0.0
    axes = [np.linspace(lo, hi, points) for lo, hi in dom.bounds]
    ev = ex.Evaluator(_grid_point(dom, axes, axes[0]))
    face_max, all_max = 0.0, 0.0
    for c in comps:
        vals = np.abs(ev.full(c))
        mask = np.zeros(vals.shape, dtype=bool)
        for k in range(vals.ndim):
            idx = [slice(None)] * vals.ndim
            for end in (0, -1):
                idx[k] = end
                mask[tuple(idx)] = True
        face_max = max(face_max, float(np.max(vals[mask])))
        all_max = max(all_max, float(np.max(vals)))
    return face_max / all_max if all_max > 0 else 0.0


def check_integral_identity(Z: SectionField, spec: AlgebroidSpec, fd: FinslerData,
                            cd: ConnectionData, dom: IntegrationDomain, tol: float = 1e-3,
                            support_tol: float = 1e-6, samples: int = 20,
                            seed: int = 42) -> ValidationReport:
    """Vanishing of the integral of (nabla_{X_a} Z^a - Z^a L_a) against det_h^2.

    Also checks the barred counterpart built from conj(Z), the Kaehler
    variant without the L_a term when the connection is Kaehler, and whether
    Z has decayed on the faces of the box.  The last entry is informational:
    the same integral with the anchor divergence d_k rho^k_a added.
    """
    if not Z.is_horizontal():
        raise WrongBlockError("integral identity needs a purely horizontal section")
    _check_budget(dom)
    m = cd.m
    weight = volume_density(fd).density
    T = TensorField(m, (0, 0, 1, 0), Z.Zh)
    Tbar = TensorField(m, (0, 0, 0, 1), tuple(ex.conj(c) for c in Z.Zh))
    nabla = ex.total(cov_deriv_h(T, a, False, cd)[a] for a in range(m))
    nabla_bar = ex.total(cov_deriv_h(Tbar, a, True, cd)[a] for a in range(m))
    trace = ex.total(ex.mul(Z.Zh[a], cd.L_trace[a]) for a in range(m))
    trace_bar = ex.total(ex.mul(Tbar[a], ex.conj(cd.L_trace[a])) for a in range(m))

    report = ValidationReport()
    size = dom.total_points
    ratio = _boundary_ratio(Z, dom)
    report.add(CheckResult("support", ratio, support_tol, size,
                           note="" if ratio <= support_tol else
                           "support check failed: section has not decayed on the box faces"))
    value = integrate(ex.sub(nabla, trace), weight, dom)
    report.add(CheckResult("integral nabla_a Z^a - Z^a L_a", abs(value), tol, size,
                           value=value))
    value_bar = integrate(ex.sub(nabla_bar, trace_bar), weight, dom)
    report.add(CheckResult("integral nabla_abar Z^abar - Z^abar L_abar", abs(value_bar), tol, size,
                           value=value_bar))
    if is_kahler(cd, samples, seed):
        value_k = integrate(nabla, weight, dom)
        report.add(CheckResult("integral nabla_a Z^a (Kaehler)", abs(value_k), tol, size,
                               value=value_k))
    anchor_div = ex.total(ex.mul(Z.Zh[a], spec.anchor_divergence(a)) for a in range(m))
    value_c = integrate(ex.add(ex.sub(nabla, trace), anchor_div), weight, dom)
    report.add(CheckResult("integral with anchor-divergence correction", abs(value_c), tol, size,
                           value=value_c,
                           informational=True))
    return report


def grid_refinement_check(f: ex.Expr, weight: ex.Expr, dom: IntegrationDomain,
                          exact: complex = 0.0, floor: float = 1e-3,
                          factor: int = 2) -> CheckResult:
    """Error at grid g*factor is at most half the error at grid g, or below ``floor``."""
    coarse = abs(integrate(f, weight, dom) - exact)
    fine = abs(integrate(f, weight, dom.refined(factor)) - exact)
    ok = fine <= coarse / 2 or fine <= floor
    return CheckResult(f"grid refinement {dom.grid} -> {dom.grid * factor}", fine, floor,
                       dom.refined(factor).total_points, passed=ok,
                       note=f"errors {coarse:.3e} -> {fine:.3e}")

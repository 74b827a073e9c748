"""Validation reports, residual measures and seeded sample points."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .expr import EvalPoint

# sample annulus for every coordinate: keeps off the origin and off log cuts
ANNULUS = (0.3, 1.5)


@dataclass
class CheckResult:
    name: str
    max_residual: float
    tolerance: float
    samples: int
    passed: bool | None = None
    note: str = ""
    informational: bool = False  # reported, never affects the overall verdict
    skipped: bool = False
    value: complex | None = None  # the computed quantity, when there is a single one

    def __post_init__(self):
        if self.passed is None:
            self.passed = self.skipped or bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def extend(self, other: "ValidationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]


def residual(a, b) -> float:
    """Max over a batch of |a - b| / (1 + max(|a|, |b|))."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
    r = np.abs(a - b) / scale
    return float(np.max(r)) if r.size else 0.0


def abs_residual(a) -> float:
    """Max over a batch of |a| / 1 (for quantities that should vanish)."""
    a = np.asarray(a, dtype=complex)
    return float(np.max(np.abs(a))) if a.size else 0.0


def annulus_samples(rng: np.random.Generator, count: int, lo=ANNULUS[0], hi=ANNULUS[1]):
    """Complex numbers uniformly distributed (by area) in lo <= |w| <= hi."""
    r = np.sqrt(rng.uniform(lo * lo, hi * hi, size=count))
    theta = rng.uniform(0.0, 2 * np.pi, size=count)
    return r * np.exp(1j * theta)


def sample_points(n: int, m: int, samples: int, seed: int) -> EvalPoint:
    """A seeded batch of ``samples`` points with every coordinate in the annulus."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    z = tuple(annulus_samples(rng, samples) for _ in range(n))
    u = tuple(annulus_samples(rng, samples) for _ in range(m))
    return EvalPoint(z, u)

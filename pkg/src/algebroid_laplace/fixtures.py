"""The three reference geometries used across tests and scenario files."""
from __future__ import annotations

from .algebroid import AlgebroidSpec
from .parsing import parse_expr

__all__ = ["fixture_a", "fixture_b", "fixture_c", "corrupted_c"]


def _spec(n, m, anchor, structure, F):
    P = lambda s: parse_expr(s, n, m)  # noqa: E731
    spec = AlgebroidSpec(n, m, tuple(tuple(P(s) for s in row) for row in anchor),
                         {k: P(s) for k, s in structure.items()})
    return spec, P(F)


def fixture_a():
    """Flat: n = m = 1, anchor 1, F = u1 conj(u1)."""
    return _spec(1, 1, [["1"]], {}, "u1*conj(u1)")


def fixture_b():
    """n = m = 1, anchor z1, F = exp(z1 conj(z1)) u1 conj(u1).  Kaehler."""
    return _spec(1, 1, [["z1"]], {}, "exp(z1*conj(z1))*u1*conj(u1)")


def fixture_c(structure: str = "1"):
    """n = 1, m = 2, anchors (1, z1), [e_1, e_2] = e_1.  Not Kaehler."""
    return _spec(1, 2, [["1"], ["z1"]], {(0, 0, 1): structure},
                 "exp(z1*conj(z1))*(u1*conj(u1)+u2*conj(u2))")


def corrupted_c():
    """Fixture C with the structure function doubled, violating compatibility."""
    return fixture_c("2")

import json
from pathlib import Path

import pytest

from algebroid_laplace import expr as ex
from algebroid_laplace.connection import build_connection
from algebroid_laplace.finsler import build_finsler
from algebroid_laplace.fixtures import corrupted_c, fixture_a, fixture_b, fixture_c
from algebroid_laplace.parsing import parse_expr

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
ORACLE = json.loads((Path(__file__).parent / "oracles" / "values.json").read_text())


class Geo:
    """spec, F, FinslerData and ConnectionData of one fixture."""

    def __init__(self, name, builder):
        self.name = name
        self.spec, self.F = builder()
        self.fd = build_finsler(self.spec, self.F)
        self.cd = build_connection(self.spec, self.fd)
        self.n, self.m = self.spec.n, self.spec.m

    def P(self, text):
        return parse_expr(text, self.n, self.m)

    def one(self):
        """z = 1, every u = 1."""
        return ex.EvalPoint((1.0,) * self.n, (1.0,) * self.m)


_GEOS = {}


def geo(name):
    if name not in _GEOS:
        _GEOS[name] = Geo(name, {"A": fixture_a, "B": fixture_b, "C": fixture_c,
                                 "Cbad": corrupted_c}[name])
    return _GEOS[name]


@pytest.fixture(params=["A", "B", "C"])
def any_geo(request):
    return geo(request.param)


@pytest.fixture
def A():
    return geo("A")


@pytest.fixture
def B():
    return geo("B")


@pytest.fixture
def C():
    return geo("C")


def oracle(*path):
    v = ORACLE
    for k in path:
        v = v[k]
    return complex(*v) if isinstance(v, list) and len(v) == 2 and not isinstance(v[0], list) else v


def oracle_point(m):
    z = complex(*ORACLE["point"]["z"])
    u = tuple(complex(*c) for c in ORACLE["point"]["u"][:m])
    return ex.EvalPoint((z,), u)


ACCEPTANCE = []


def record_criterion(number, passed, detail):
    """Print and remember one acceptance line; shown again in the terminal summary."""
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} | {detail}"
    print(line)
    ACCEPTANCE.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

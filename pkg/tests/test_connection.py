import pytest

from algebroid_laplace import expr as ex
from algebroid_laplace.connection import (build_connection, check_connection_identities,
                                          delta_deriv, is_kahler, verify_brackets)
from algebroid_laplace.checks import default_functions
from algebroid_laplace.finsler import build_finsler

from conftest import geo, oracle, oracle_point


def test_fixture_b_values():
    g = geo("B")
    one = g.one()
    assert ex.evaluate(g.cd.N[0][0], one) == pytest.approx(oracle("B", "N_at_1"))
    assert ex.evaluate(g.cd.L[0][0][0], one) == pytest.approx(oracle("B", "L_at_1"))
    assert ex.evaluate(delta_deriv(g.P("u1"), 0, False, g.cd), one) == pytest.approx(
        oracle("B", "delta_u_at_1"))


def test_fixture_a_connection_vanishes():
    g = geo("A")
    assert g.cd.N[0][0] is ex.ZERO
    assert g.cd.L[0][0][0] is ex.ZERO


@pytest.mark.parametrize("block", ["N", "L", "C", "R"])
def test_fixture_c_against_oracle(block):
    g = geo("C")
    ev = ex.Evaluator(oracle_point(2))
    arr = getattr(g.cd, block)
    ref = oracle("C", block)

    def walk(a, r):
        if isinstance(a, tuple):
            for x, y in zip(a, r):
                walk(x, y)
        else:
            assert ev(a) == pytest.approx(complex(*r), abs=1e-12)
    walk(arr, ref)


def test_fixture_c_traces():
    g = geo("C")
    ev = ex.Evaluator(oracle_point(2))
    for a in range(2):
        assert ev(g.cd.L_trace[a]) == pytest.approx(oracle("C", "L_alpha", a))


def test_kahler_flags():
    assert is_kahler(geo("A").cd)
    assert is_kahler(geo("B").cd)
    assert not is_kahler(geo("C").cd)


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_identities_and_brackets(name):
    g = geo(name)
    rep = check_connection_identities(g.cd)
    rep.extend(verify_brackets(g.spec, g.cd, default_functions(g.n, g.m)))
    for c in rep.checks:
        assert c.passed, c
        assert c.max_residual <= 1e-8


def test_delta_index_checked():
    g = geo("B")
    with pytest.raises(IndexError):
        delta_deriv(g.P("u1"), 1, False, g.cd)


def test_inhomogeneous_gate():
    g = geo("A")
    F = g.P("u1*conj(u1) + (u1*conj(u1))^2")
    cd = build_connection(g.spec, build_finsler(g.spec, F))
    rep = check_connection_identities(cd, homogeneous=False)
    entry = rep["L^c_ab = d(N^c_b)/du^a"]
    assert entry.skipped and entry.note == "skipped: inhomogeneous"


def test_brackets_need_functions():
    g = geo("A")
    with pytest.raises(ValueError):
        verify_brackets(g.spec, g.cd, [])


def test_broken_bracket_formula_detected():
    # the corrupted structure function still yields a connection, but the
    # frame bracket [X_1, X_2] no longer matches C^c_12 X_c + R^c_12 V_c
    g = geo("Cbad")
    rep = verify_brackets(g.spec, g.cd, default_functions(1, 2))
    assert not rep["bracket [X_a,X_b]"].passed

import math

import numpy as np
import pytest

from algebroid_laplace import expr as ex
from algebroid_laplace import forms as fm
from algebroid_laplace.checks import CheckOptions, adjointness_check, build_geometry
from algebroid_laplace.quadrature import IntegrationDomain
from algebroid_laplace.report import sample_points
from algebroid_laplace.scenario import load_scenario

from conftest import SCENARIOS, geo, oracle


def form01(g, *coeffs):
    return fm.HorizontalForm(g.m, 0, 1, {((), (b,)): g.P(c) for b, c in enumerate(coeffs)})


def form_residual(g, F1, F2, samples=20, seed=42):
    ev = ex.Evaluator(sample_points(g.n, g.m, samples, seed))
    out = 0.0
    for key in F1.keys():
        x, y = ev.full(F1[key]), ev.full(F2[key])
        out = max(out, float(np.max(np.abs(x - y) / (1 + np.maximum(np.abs(x), np.abs(y))))))
    return out


def test_antisymmetric_reads():
    g = geo("C")
    F = fm.HorizontalForm(2, 2, 0, {((0, 1), ()): g.P("z1")})
    assert F[(1, 0), ()] is not F[(0, 1), ()]
    assert ex.evaluate(F[(1, 0), ()], g.one()) == -1
    assert F[(0, 0), ()] is ex.ZERO


def test_bad_degrees():
    with pytest.raises(fm.DegreeError):
        fm.HorizontalForm(1, 2, 0, {})
    with pytest.raises(ValueError):
        fm.HorizontalForm(2, 0, 1, {((), (1, 0)): ex.ONE})


def test_differential_overflow():
    g = geo("B")
    top = form01(g, "z1")
    with pytest.raises(fm.DegreeError):
        fm.delbar_h(top, g.cd)
    with pytest.raises(fm.DegreeError):
        fm.del_h(fm.HorizontalForm(1, 1, 0, {((0,), ()): ex.ONE}), g.cd)


def test_delbar_of_function_is_delta():
    g = geo("C")
    f = g.P("z1*conj(z1)*u1*conj(u2)")
    d = fm.delbar_h(fm.HorizontalForm.scalar(2, f), g.cd)
    for b in range(2):
        assert form_residual(g, fm.HorizontalForm(2, 0, 1, {((), (b,)): d[(), (b,)]}),
                             fm.HorizontalForm(2, 0, 1, {((), (b,)): g.cd.delta(f, b, True)})) == 0


def test_delbar_twice_is_frame_commutator():
    # no structure-function term in the differential, so delbar^h delbar^h f
    # is the commutator [delta_1bar, delta_2bar] f, nonzero on Fixture C
    g = geo("C")
    f = g.P("exp(z1*conj(z1))*u1*conj(u2) + conj(z1)^2*u2")
    dd = fm.delbar_h(fm.delbar_h(fm.HorizontalForm.scalar(2, f), g.cd), g.cd)
    comm = ex.sub(g.cd.delta(g.cd.delta(f, 1, True), 0, True),
                  g.cd.delta(g.cd.delta(f, 0, True), 1, True))
    assert form_residual(g, dd, fm.HorizontalForm(2, 0, 2, {((), (0, 1)): comm})) <= 1e-12
    assert form_residual(g, dd, fm.HorizontalForm(2, 0, 2, {})) > 1e-3


def test_fixture_b_pointwise_inner_product():
    g = geo("B")
    phi = form01(g, "z1*conj(z1)")
    val = ex.evaluate(fm.inner_product_pointwise(phi, phi, g.fd), g.one())
    assert val == pytest.approx(oracle("B", "ip_dz_bar_at_1"))


def test_fixture_b_adjoint_routes():
    g = geo("B")
    phi = form01(g, "u1*conj(u1)")
    adj2 = ex.evaluate(fm.delbar_adjoint(phi, g.fd, g.cd)[(), ()], g.one())
    adj1 = ex.evaluate(fm.delbar_adjoint_raised(phi, g.fd, g.cd)[(), ()], g.one())
    assert adj2 == pytest.approx(oracle("B", "adj2_uu_at_1"), abs=1e-12)
    assert adj2 == pytest.approx(1 / math.e)
    assert adj1 == pytest.approx(oracle("B", "adj1_uu_at_1"), abs=1e-12)


def test_fixture_b_box_routes():
    g = geo("B")
    phi = form01(g, "u1*conj(u1)")
    key = ((), (0,))
    literal = ex.evaluate(fm.box_h(phi, g.fd, g.cd)[key], g.one())
    composed = ex.evaluate(fm.box_h_composed(phi, g.fd, g.cd)[key], g.one())
    corrected = ex.evaluate(fm.box_h(phi, g.fd, g.cd, corrected=True)[key], g.one())
    assert literal == pytest.approx(oracle("B", "box_literal_uu_at_1"), abs=1e-12)
    assert composed == pytest.approx(oracle("B", "box_composed_uu_at_1"), abs=1e-12)
    assert corrected == pytest.approx(composed, abs=1e-12)


def test_flat_box_value():
    g = geo("A")
    phi = form01(g, "z1*conj(z1)")
    for op in (fm.box_h, fm.box_h_composed, fm.box_h_kahler):
        val = ex.evaluate(op(phi, g.fd, g.cd)[(), (0,)], g.one())
        assert abs(val + 1) <= 1e-12


@pytest.mark.parametrize("name", ["A", "B", "C"])
@pytest.mark.parametrize("pq", [(0, 1), (1, 1)])
def test_corrected_closed_form_matches_composition(name, pq):
    g = geo(name)
    rng = np.random.default_rng(5)
    for _ in range(3):
        phi = fm.random_form(rng, g.n, g.m, *pq)
        assert form_residual(g, fm.box_h(phi, g.fd, g.cd, corrected=True),
                             fm.box_h_composed(phi, g.fd, g.cd)) <= 1e-8


def test_conjugation_sign_and_involution():
    g = geo("C")
    phi = fm.HorizontalForm(2, 1, 1, {((0,), (1,)): g.P("z1*u2")})
    c = fm.conjugate_form(phi)
    assert (c.p, c.q) == (1, 1)
    assert ex.evaluate(c[(1,), (0,)], g.one()) == -1
    assert form_residual(g, fm.conjugate_form(c), phi) == 0


def test_degree_mismatch_in_inner_product():
    g = geo("C")
    with pytest.raises(fm.DegreeError):
        fm.inner_product_pointwise(form01(g, "1", "0"), fm.HorizontalForm.scalar(2, ex.ONE), g.fd)


def test_global_adjointness_flat():
    sc = load_scenario(SCENARIOS / "fixture_a.json")
    opts = CheckOptions()
    gg = build_geometry(sc, opts)
    dom = IntegrationDomain.cube(1, 1, -4, 4, 32)
    res = adjointness_check(gg, opts, dom)
    assert res.passed and res.max_residual <= 1e-3

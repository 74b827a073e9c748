import math

import numpy as np
import pytest

from algebroid_laplace import calculus as calc
from algebroid_laplace import expr as ex
from algebroid_laplace.checks import default_functions
from algebroid_laplace.report import sample_points

from conftest import geo, oracle, oracle_point


def worst(g, a, b, samples=20, seed=42):
    ev = ex.Evaluator(sample_points(g.n, g.m, samples, seed))
    x, y = ev.full(a), ev.full(b)
    return float(np.max(np.abs(x - y) / (1 + np.maximum(np.abs(x), np.abs(y)))))


def test_flat_laplacian_of_zzbar_is_one():
    g = geo("A")
    val = ex.evaluate(calc.laplacian_h(g.P("z1*conj(z1)"), g.fd, g.cd), g.one())
    assert abs(val - 1) <= 1e-12


def test_fixture_b_spot_value():
    g = geo("B")
    val = ex.evaluate(calc.laplacian_h(g.P("z1*conj(z1)"), g.fd, g.cd), g.one())
    assert val == pytest.approx(oracle("B", "lap_h_zz_at_1"), abs=1e-12)


def test_fixture_c_spot_values():
    g = geo("C")
    f = g.P("z1*conj(z1)")
    assert abs(ex.evaluate(calc.laplacian_h(f, g.fd, g.cd), g.one()) - 5 / math.e) <= 1e-6
    # literal covariant display omits Y^a L_a
    cov = ex.evaluate(calc.laplacian_h_cov(f, g.fd, g.cd), g.one())
    assert cov == pytest.approx(oracle("C", "lap_h_cov_zz_at_1"), abs=1e-12)
    assert cov == pytest.approx(3 / math.e)


@pytest.mark.parametrize("kind", ["lap_h", "lap_v", "lap_h_cov"])
def test_fixture_c_against_oracle(kind):
    g = geo("C")
    f = g.P(oracle("C", "mixed"))
    op = {"lap_h": calc.laplacian_h, "lap_v": calc.laplacian_v,
          "lap_h_cov": calc.laplacian_h_cov}[kind]
    val = ex.Evaluator(oracle_point(2))(op(f, g.fd, g.cd))
    assert val == pytest.approx(oracle("C", kind + "_mixed"), rel=1e-10)


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_vertical_forms_agree(name):
    g = geo(name)
    for f in default_functions(g.n, g.m):
        assert worst(g, calc.laplacian_v(f, g.fd, g.cd), calc.laplacian_v_cov(f, g.fd, g.cd)) <= 1e-8


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_corrected_covariant_horizontal_agrees(name):
    g = geo(name)
    for f in default_functions(g.n, g.m):
        a = calc.laplacian_h(f, g.fd, g.cd)
        b = calc.laplacian_h_cov(f, g.fd, g.cd, with_trace_term=True)
        assert worst(g, a, b) <= 1e-8


def test_literal_covariant_horizontal_differs_off_kahler():
    g = geo("C")
    f = g.P("z1*conj(z1)")
    assert worst(g, calc.laplacian_h(f, g.fd, g.cd), calc.laplacian_h_cov(f, g.fd, g.cd)) > 1e-3


@pytest.mark.parametrize("name", ["A", "B"])
def test_literal_covariant_horizontal_agrees_when_kahler(name):
    g = geo(name)
    for f in default_functions(g.n, g.m):
        assert worst(g, calc.laplacian_h(f, g.fd, g.cd), calc.laplacian_h_cov(f, g.fd, g.cd)) <= 1e-8


def test_frame_divergence_oracle():
    g = geo("C")
    X2 = calc.SectionField.horizontal([ex.ZERO, ex.ONE])
    val = ex.evaluate(calc.div_h(X2, g.cd), g.one())
    assert val == pytest.approx(oracle("C", "div_X2_at_1"), abs=1e-12)


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_divergence_consistency(name):
    g = geo(name)
    Z = calc.SectionField.horizontal([g.P("exp(-z1*conj(z1))*u%d" % (a + 1)) for a in range(g.m)])
    rep = calc.divergence_consistency_check(Z, g.cd)
    assert rep.passed
    for c in rep.checks:
        if not c.informational:
            assert c.max_residual <= 1e-10


def test_gradient_is_horizontal_and_vertical():
    g = geo("C")
    f = g.P("z1*conj(u2)")
    assert calc.grad_h(f, g.fd, g.cd).is_horizontal()
    assert calc.grad_v(f, g.fd, g.cd).is_vertical()


def test_wrong_block_rejected():
    g = geo("B")
    V = calc.SectionField.vertical([ex.ONE])
    H = calc.SectionField.horizontal([ex.ONE])
    with pytest.raises(calc.WrongBlockError):
        calc.div_h(V, g.cd)
    with pytest.raises(calc.WrongBlockError):
        calc.div_v(H, g.cd)
    with pytest.raises(calc.WrongBlockError):
        calc.divergence_consistency_check(V, g.cd)


def test_volume_density_squares_det():
    g = geo("B")
    d = ex.evaluate(calc.volume_density(g.fd).density, g.one())
    assert d == pytest.approx(oracle("B", "det_sq_at_1"))


def test_tensor_field_shape_checked():
    with pytest.raises(ValueError):
        calc.TensorField(2, (1, 0, 0, 0), (ex.ONE,))


def test_covariant_derivative_of_scalar_is_delta():
    g = geo("C")
    f = g.P("z1*u2*conj(u1)")
    T = calc.TensorField.scalar(2, f)
    for a in range(2):
        for barred in (False, True):
            d = calc.cov_deriv_h(T, a, barred, g.cd)[()]
            assert worst(g, d, g.cd.delta(f, a, barred)) == 0


def test_linearity_of_laplacians():
    g = geo("C")
    f, k = g.P("z1*conj(u1)"), g.P("exp(z1)*u2*conj(u2)")
    for op in (calc.laplacian_h, calc.laplacian_v):
        lhs = op(ex.add(ex.mul(ex.const(2 - 1j), f), k), g.fd, g.cd)
        rhs = ex.add(ex.mul(ex.const(2 - 1j), op(f, g.fd, g.cd)), op(k, g.fd, g.cd))
        assert worst(g, lhs, rhs) <= 1e-10

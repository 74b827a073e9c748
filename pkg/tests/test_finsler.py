import math

import numpy as np
import pytest

from algebroid_laplace import expr as ex
from algebroid_laplace.finsler import (FinslerError, build_finsler, check_homogeneity,
                                       check_pseudoconvexity, metric_at)
from algebroid_laplace.report import sample_points

from conftest import geo, oracle, oracle_point


def test_fixture_a_flat():
    g = geo("A")
    assert g.fd.h[0][0] is ex.ONE
    assert ex.evaluate(g.fd.det_h, g.one()) == 1


def test_fixture_c_det():
    g = geo("C")
    assert ex.evaluate(g.fd.det_h, g.one()) == pytest.approx(oracle("C", "det_at_1"))
    assert ex.evaluate(g.fd.det_h, g.one()) == pytest.approx(math.e ** 2)


def test_inverse_against_oracle():
    g = geo("C")
    ev = ex.Evaluator(oracle_point(2))
    for s in range(2):
        for b in range(2):
            assert ev(g.fd.h_inv[s][b]) == pytest.approx(oracle("C", "h_inv", s, b))


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_inverse_identity(name):
    g = geo(name)
    H = metric_at(g.fd, sample_points(g.n, g.m, 10, 3))
    ev = ex.Evaluator(sample_points(g.n, g.m, 10, 3))
    Hi = np.moveaxis(np.array([[ev.full(g.fd.h_inv[s][b]) for b in range(g.m)]
                               for s in range(g.m)]), (0, 1), (-2, -1))
    # sum_s h_inv[s][b] h[a][s] = delta_ab
    assert np.allclose(H @ Hi, np.eye(g.m))


def test_general_rank_three_inverse():
    P = lambda s: __import__("algebroid_laplace.parsing", fromlist=["x"]).parse_expr(s, 1, 3)  # noqa: E731
    from algebroid_laplace.algebroid import AlgebroidSpec
    spec = AlgebroidSpec(1, 3, ((ex.ONE,),) * 3)
    F = P("exp(z1*conj(z1))*u1*conj(u1) + u2*conj(u2) + 2*u3*conj(u3) + z1*u1*conj(u2) + conj(z1)*u2*conj(u1)")
    fd = build_finsler(spec, F)
    pt = sample_points(1, 3, 6, 9)
    H = metric_at(fd, pt)
    ev = ex.Evaluator(pt)
    Hi = np.moveaxis(np.array([[ev.full(fd.h_inv[s][b]) for b in range(3)] for s in range(3)]),
                     (0, 1), (-2, -1))
    assert np.allclose(H @ Hi, np.eye(3))
    assert np.allclose(ev.full(fd.det_h), np.linalg.det(H))


@pytest.mark.parametrize("name", ["A", "B", "C"])
def test_fixtures_homogeneous_and_convex(name):
    g = geo(name)
    assert check_homogeneity(g.spec, g.F)
    assert check_pseudoconvexity(g.spec, g.fd)


def test_inhomogeneous_detected():
    g = geo("A")
    assert not check_homogeneity(g.spec, g.P("u1*conj(u1) + (u1*conj(u1))^2"))


def test_not_convex_detected():
    g = geo("C")
    fd = build_finsler(g.spec, g.P("u1*conj(u1) - 2*u2*conj(u2)"))
    assert not check_pseudoconvexity(g.spec, fd)


def test_degenerate_metric_rejected():
    g = geo("C")
    with pytest.raises(FinslerError, match="zero"):
        build_finsler(g.spec, g.P("u1*conj(u1)"))


def test_dimension_mismatch_rejected():
    g = geo("A")
    from algebroid_laplace.parsing import parse_expr
    with pytest.raises(FinslerError):
        build_finsler(g.spec, parse_expr("u2*conj(u2)", 1, 2))

import pytest

from algebroid_laplace import expr as ex
from algebroid_laplace.expr import EvalPoint
from algebroid_laplace.parsing import (ExprSyntaxError, IndexOutOfRangeError,
                                       NonIntegerExponentError, UnknownIdentifierError,
                                       parse_expr)

PT = EvalPoint.of([0.5 + 0.25j], [1 - 1j, 2j])


def val(text):
    return ex.evaluate(parse_expr(text, 1, 2), PT)


@pytest.mark.parametrize("text, expected", [
    ("1+2*3", 7),
    ("2^3", 8),
    ("-z1^2", -(0.5 + 0.25j) ** 2),
    ("(1-z1)^-1", 1 / (1 - (0.5 + 0.25j))),
    ("3*i", 3j),
    ("conj(u1)*u2", (1 + 1j) * 2j),
    ("exp(0)+log(1)", 1),
    ("1e-1*10", 1),
    ("8/4/2", 1),
    ("2-3-4", -5),
])
def test_values(text, expected):
    assert val(text) == pytest.approx(expected)


def test_variables_are_zero_based_internally():
    e = parse_expr("u2", 1, 2)
    assert e.value == ex.Var("u", 1)


@pytest.mark.parametrize("text, exc, pos", [
    ("z1 + w1", UnknownIdentifierError, 5),
    ("z2", IndexOutOfRangeError, 0),
    ("u3*z1", IndexOutOfRangeError, 0),
    ("z1^1.5", NonIntegerExponentError, 3),
    ("z1^u1", NonIntegerExponentError, 3),
    ("(z1+1", ExprSyntaxError, 5),
    ("z1 +", ExprSyntaxError, 4),
    ("z1 $ 2", ExprSyntaxError, 3),
    ("exp z1", ExprSyntaxError, 4),
    ("2^3^1", ExprSyntaxError, 3),
])
def test_errors(text, exc, pos):
    with pytest.raises(exc) as info:
        parse_expr(text, 1, 2)
    assert info.value.position == pos
    assert isinstance(info.value, ValueError)

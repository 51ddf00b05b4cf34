import mpmath
import pytest

from holoproof.arith import RF
from holoproof.dsl import parse_expr
from holoproof.evaluate import EvalError, closed, function, legendre_poly, sequence
from holoproof.ore import normalize, render
from holoproof.series import series_apply, spherical_j
from oracles import numeric


def test_closed_spherical_bessel():
    assert closed(parse_expr("sphj(1, z)")) == spherical_j(1)
    assert str(closed(parse_expr("sphj(1, z)"))) == "-1/z*cos(z) + 1/z^2*sin(z)"


def test_closed_values_are_exact():
    assert closed(parse_expr("harmonic(4)")) == closed(parse_expr("25/12"))
    assert mpmath.almosteq(numeric(closed(parse_expr("psi(3/2)")), 1), mpmath.digamma(1.5), 1e-30)


def test_legendre_polynomial():
    assert legendre_poly(2, "c") == RF.parse("3/2*c^2 - 1/2")
    assert legendre_poly(0, "c") == RF(1)


def test_hadamard_sequence_recurrence():
    s = sequence(parse_expr("(-1)^n/fact(n)*sphy(n - 1, z)"), "n")
    assert render(normalize(s.op)) == "z*S^0 + (n+1)*(2*n+1)*S^1 + z*(n+1)*(n+2)*S^2"


def test_harmonic_sequence():
    s = sequence(parse_expr("harmonic(n)"), "n")
    assert render(s.op) == "(n+1)*S^0 - (2*n+3)*S^1 + (n+2)*S^2"
    assert [str(x) for x in s.terms(4)] == ["0", "1", "3/2", "11/6"]


def test_bessel_leaf_operator():
    f = function(parse_expr("besselj(0, z*sqrt(1-c^2))"), "z")
    assert render(normalize(f.annihilator())) == "-(c-1)*(c+1)*z*D^0 + D^1 + z*D^2"


@pytest.mark.parametrize("text", [
    "si(2*z)/(2*z)",
    "besselj(0, z*sqrt(1-c^2))",
    "sin(z)*cos(z)",
    "sphj(2, z)",
    "exp(z) + sinh(z)",
])
def test_annihilator_kills_series(text):
    f = function(parse_expr(text), "z")
    L = f.annihilator()
    assert series_apply(L, f.series(24)).is_zero()


def test_non_numeric_exponent_rejected():
    with pytest.raises(EvalError) as err:
        function(parse_expr("sin(z)^z"), "z")
    assert err.value.code == "not-numeric"


def test_pole_reported():
    with pytest.raises(EvalError) as err:
        closed(parse_expr("fact(-1)"))
    assert err.value.code == "pole"

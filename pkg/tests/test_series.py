from fractions import Fraction

import mpmath
import pytest

from holoproof.constants import CE
from holoproof.ore import diff_op
from holoproof.series import (
    CATALOG,
    SeriesError,
    SymbolicSeries,
    base_series,
    expand_constexpr,
    gamma_half_integer,
    gamma_half_integer_reciprocal,
    harmonic,
    modified_spherical,
    psi_half_integer,
    psi_integer,
    series_apply,
    series_arith,
    spherical_j,
    spherical_y,
    unroll,
)
from holoproof.ore import shift_op
from oracles import numeric, sph_j, sph_y, to_mpf


def plain(s):
    return [str(c) for c in s.c0]


def test_sine_integral():
    s = base_series("si", N=5)
    assert s.alpha == 0 and plain(s) == ["0", "1", "0", "-1/18", "0", "1/600"]


def test_cosine_integral_has_log_slot():
    c = base_series("ci", N=4)
    assert plain(c) == ["eulergamma", "0", "-1/4", "0", "1/96"]
    assert plain(SymbolicSeries(c.var, c.alpha, c.c1)) == ["1", "0", "0", "0", "0"]


def test_exponential_integral():
    e = base_series("e1", N=3)
    assert plain(e) == ["-eulergamma", "1", "-1/4", "1/18"]
    assert [str(x) for x in e.c1] == ["-1", "0", "0", "0"]


def test_log_half_z():
    s = base_series("log_half_z", N=2)
    assert plain(s) == ["-log(2)", "0", "0"] and str(s.c1[0]) == "1"


def test_dilated_sine():
    assert plain(base_series("sin", (2,), N=3)) == ["0", "2", "0", "-4/3"]


def test_spherical_y0_starts_at_inverse_power():
    y = base_series("sphy", (0,), N=3)
    assert y.alpha == -1 and plain(y) == ["-1", "0", "1/2", "0", "-1/24"]


def test_unknown_expansion_lists_catalog():
    with pytest.raises(SeriesError) as err:
        base_series("foo")
    assert err.value.code == "unsupported-expansion"
    assert all(name in str(err.value) for name in CATALOG)


def test_sine_integral_derivative_is_sinc():
    si = base_series("si", N=12)
    sinc = base_series("sin", N=13).shift_exponent(-1)
    d = si.derivative()
    assert all(d.coeff(e) == sinc.coeff(e) for e in range(0, 11))


@pytest.mark.parametrize("name", ["sin", "cos", "sinh", "cosh", "exp"])
def test_elementary_derivatives(name):
    deriv = {"sin": "cos", "cos": "sin", "sinh": "cosh", "cosh": "sinh", "exp": "exp"}[name]
    sign = -1 if name == "cos" else 1
    d = base_series(name, N=12).derivative()
    other = base_series(deriv, N=12)
    assert all(d.coeff(e) == other.coeff(e) * sign for e in range(0, 11))


def test_bessel_i_half_solves_modified_bessel_equation():
    f = base_series("bessel_i", (Fraction(1, 2),), N=16)
    L = diff_op("z", ["-(z^2 + 1/4)", "z", "z^2"])
    assert series_apply(L, f).is_zero()


@pytest.mark.parametrize("k", range(-3, 9))
def test_spherical_closed_forms_numerically(k):
    for z in (Fraction(7, 10), Fraction(23, 10)):
        assert mpmath.almosteq(numeric(spherical_j(k), z), sph_j(k, z), 1e-30)
        assert mpmath.almosteq(numeric(spherical_y(k), z), sph_y(k, z), 1e-30)


@pytest.mark.parametrize("m", range(-3, 6))
def test_modified_spherical_numerically(m):
    z = Fraction(9, 10)
    ref = mpmath.sqrt(mpmath.pi / (2 * to_mpf(z))) * mpmath.besseli(m + mpmath.mpf(1) / 2, to_mpf(z))
    assert mpmath.almosteq(numeric(modified_spherical(m), z), ref, 1e-30)


@pytest.mark.parametrize("k", range(0, 6))
def test_spherical_series_matches_closed_form(k):
    s = expand_constexpr(spherical_j(k), "z", 14)
    # j_k(z) = z^k / (2k+1)!! (1 + O(z^2))
    dfact = 1
    for i in range(1, 2 * k + 2, 2):
        dfact *= i
    assert s.coeff(k) == CE.const(Fraction(1, dfact))
    assert all(s.coeff(e).is_zero() for e in range(int(s.alpha), k))


def test_psi_functional_equation():
    for n in range(-1, 51):
        # psi(x + 1) = psi(x) + 1/x at x = n + 3/2
        assert psi_half_integer(n + 1) - psi_half_integer(n) == CE.const(Fraction(2, 2 * n + 3))
    for n in range(1, 51):
        assert psi_integer(n + 1) - psi_integer(n) == CE.const(Fraction(1, n))


def test_gamma_functional_equation():
    for n in range(-1, 51):
        assert gamma_half_integer(n + 1) == gamma_half_integer(n) * Fraction(2 * n + 3, 2)
        assert gamma_half_integer(n) * gamma_half_integer_reciprocal(n) == CE.const(1)


@pytest.mark.parametrize("n", [-1, 0, 1, 7, 50])
def test_psi_gamma_numerically(n):
    x = mpmath.mpf(n) + mpmath.mpf(3) / 2
    assert mpmath.almosteq(numeric(psi_half_integer(n), 1), mpmath.digamma(x), 1e-30)
    assert mpmath.almosteq(numeric(gamma_half_integer(n), 1), mpmath.gamma(x), 1e-30)
    if n >= 1:
        assert mpmath.almosteq(numeric(psi_integer(n), 1), mpmath.digamma(n), 1e-30)


def test_harmonic():
    assert harmonic(0) == 0 and harmonic(4) == Fraction(25, 12)


def test_unroll_matches_closed_form():
    # (n+1) f(n+1) = 2 f(n), f(0) = 1  ->  f(n) = 2^n / n!
    vals = unroll(shift_op("n", ["-2", "n+1"]), [Fraction(1)], 10)
    from math import factorial
    assert vals == [Fraction(2 ** n, factorial(n)) for n in range(11)]


def test_series_arithmetic_aligns_exponents():
    a = base_series("sin", N=6)
    b = base_series("sphy", (0,), N=6)
    s = series_arith(a, b, "add")
    assert s.alpha == -1
    assert s.coeff(1) == a.coeff(1) + b.coeff(1)

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from holoproof.arith import (
    RF,
    ArithmeticError_,
    integer_roots_nonneg,
    poly,
    render_ratfun,
    render_ratfun_factored,
    var,
)

n, k, z = sympy.symbols("n k z")

small = st.integers(min_value=-4, max_value=4)


@st.composite
def polys(draw, names=("n", "z"), max_terms=4):
    """Random sparse polynomial as (holoproof text, sympy expr)."""
    terms = draw(st.lists(st.tuples(small, st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=max_terms))
    text = " + ".join(f"({c})*{names[0]}^{a}*{names[1]}^{b}" for c, a, b in terms)
    return text, sympy.sympify(text.replace("^", "**"))


def same(r, expr):
    mine = sympy.sympify(f"({r.num})/({r.den})".replace("^", "**"))
    return sympy.simplify(mine - expr) == 0


def test_reduced_form():
    r = RF.parse("(n^2-1)/(2*n-2)")
    assert str(r) == "1/2*n+1/2"
    assert render_ratfun_factored(r) == "1/2*(n+1)"
    assert r.den.is_one()


def test_factored_rendering():
    r = RF.parse("-(c-1)*(c+1)*z")
    assert render_ratfun(r) == "-z*c^2+z"
    assert render_ratfun_factored(r) == "-(c-1)*(c+1)*z"


def test_shift_diff_compose():
    assert RF.parse("1/(n+1)").shift("n", 2) == RF.parse("1/(n+3)")
    assert RF.parse("z^2*t").diff("z") == RF.parse("2*z*t")
    assert RF.parse("n*k").compose({"k": var("n") + 1}) == RF.parse("n^2+n")
    assert RF.parse("n/(n+1)").subs({"n": 3}).constant_value() == Fraction(3, 4)


def test_integer_roots_nonneg():
    assert integer_roots_nonneg(poly("(n-3)*(n+2)*(2*n-5)*(n-7)"), "n") == [3, 7]
    assert integer_roots_nonneg(poly("(n+1)*(n+2)"), "n") == []
    assert integer_roots_nonneg(poly("n*(n-1)"), "n") == [0, 1]


def test_division_by_zero():
    with pytest.raises(ArithmeticError_) as err:
        RF(1) / RF(0)
    assert "zero-divisor" in str(err.value)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_field_operations_match_sympy(a, b, c):
    ra, rb, rc = (RF.parse(x[0]) for x in (a, b, c))
    ea, eb, ec = a[1], b[1], c[1]
    assert same(ra * rb + rc, ea * eb + ec)
    assert same(ra - rb * rc, ea - eb * ec)
    if not rb.is_zero():
        assert same(ra / rb, ea / eb)
        assert (ra / rb) * rb == ra


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), st.integers(-3, 3))
def test_shift_and_derivative_match_sympy(a, b, h):
    ra, rb = RF.parse(a[0]), RF.parse(b[0])
    if rb.is_zero():
        return
    r = ra / rb
    e = a[1] / b[1]
    assert same(r.shift("n", h), e.subs(n, n + h))
    assert same(r.diff("z"), sympy.diff(e, z))
    # shifting is an automorphism
    assert r.shift("n", h).shift("n", -h) == r

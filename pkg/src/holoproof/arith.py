"""Exact arithmetic kernel: big rationals, multivariate polynomials and
normalized rational functions over Q.

Polynomials are ``flint.fmpq_mpoly`` elements living in one global context
(graded lexicographic order, variables ordered as in :data:`VARIABLES`), so
that equal polynomials always share one representation.  Rational functions
are kept reduced with a monic denominator.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm

import flint

__all__ = [
    "VARIABLES", "CTX", "BigRational", "MultiPoly", "RationalFunction",
    "ArithmeticError_", "var", "poly", "const_poly", "to_fraction",
    "integer_roots_nonneg", "univariate_coeffs", "poly_degree",
    "poly_coeff_in", "poly_content_rational", "ratfun_arith", "RF",
    "render_poly", "render_factored", "render_ratfun_factored", "render_ratfun", "poly_variables", "root_bound",
]

# n < k < z < t < c < a < sigma are the public names; the trailing ones are
# internal (summation/offset indices, composition variables, dispersion).
VARIABLES = ("n", "k", "z", "t", "c", "a", "sigma", "j", "m", "x", "g", "h")
CTX = flint.fmpq_mpoly_ctx.get(VARIABLES, "deglex")
_GENS = dict(zip(VARIABLES, CTX.gens()))
_INDEX = {name: i for i, name in enumerate(VARIABLES)}

BigRational = Fraction
MultiPoly = flint.fmpq_mpoly


class ArithmeticError_(ArithmeticError):
    """Raised for invalid exact-arithmetic requests (``code`` names the case)."""

    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


def var(name: str) -> MultiPoly:
    try:
        return _GENS[name]
    except KeyError:
        raise ArithmeticError_("unknown-variable", name) from None


def const_poly(value) -> MultiPoly:
    return CTX.constant(_to_fmpq(value))


def poly(expr: str) -> MultiPoly:
    """Build a polynomial from a small arithmetic string such as ``"(n+1)*(2*n+3)"``."""
    return _eval_poly_string(expr)


def _to_fmpq(value) -> flint.fmpq:
    if isinstance(value, flint.fmpq):
        return value
    if isinstance(value, Fraction):
        return flint.fmpq(value.numerator, value.denominator)
    if isinstance(value, int):
        return flint.fmpq(value)
    if isinstance(value, flint.fmpz):
        return flint.fmpq(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, flint.fmpq):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, flint.fmpz):
        return Fraction(int(value))
    raise TypeError(f"not an exact rational: {value!r}")


def poly_variables(p: MultiPoly) -> tuple[str, ...]:
    degs = p.degrees()
    return tuple(name for name, d in zip(VARIABLES, degs) if d > 0)


def poly_degree(p: MultiPoly, name: str) -> int:
    if p.is_zero():
        return -1
    return int(p.degrees()[_INDEX[name]])


def poly_coeff_in(p: MultiPoly, name: str) -> dict[int, MultiPoly]:
    """Split ``p`` as a polynomial in ``name``: {exponent: coefficient poly}."""
    idx = _INDEX[name]
    out: dict[int, dict] = {}
    for monom, coeff in zip(p.monoms(), p.coeffs()):
        e = int(monom[idx])
        rest = list(monom)
        rest[idx] = 0
        out.setdefault(e, {})[tuple(rest)] = coeff
    return {e: CTX.from_dict(d) for e, d in out.items()}


def univariate_coeffs(p: MultiPoly, name: str) -> list[Fraction]:
    """Dense coefficient list (low to high) of a polynomial in one variable."""
    others = set(poly_variables(p)) - {name}
    if others:
        raise ArithmeticError_("not-univariate", f"{p} involves {sorted(others)}")
    parts = poly_coeff_in(p, name)
    deg = max(parts) if parts else -1
    res = [Fraction(0)] * (deg + 1)
    for e, c in parts.items():
        res[e] = to_fraction(c.leading_coefficient()) if not c.is_zero() else Fraction(0)
    return res


def poly_content_rational(p: MultiPoly) -> Fraction:
    """Positive rational content: gcd of numerators over lcm of denominators."""
    if p.is_zero():
        return Fraction(0)
    fr = [to_fraction(c) for c in p.coeffs()]
    num = reduce(gcd, (abs(f.numerator) for f in fr))
    den = reduce(lcm, (f.denominator for f in fr))
    return Fraction(num, den)


def _lc(p: MultiPoly) -> flint.fmpq:
    return p.leading_coefficient()


def integer_roots_nonneg(p: MultiPoly, name: str | None = None) -> list[int]:
    """Ascending nonnegative integer roots of a nonzero univariate polynomial.

    Exhaustive: the polynomial is factored over Z and only linear factors
    contribute integer roots.
    """
    if p.is_zero():
        raise ArithmeticError_("identically-zero", "integer roots of the zero polynomial")
    names = poly_variables(p)
    if not names:
        return []
    if name is None:
        if len(names) != 1:
            raise ArithmeticError_("not-univariate", str(p))
        name = names[0]
    coeffs = univariate_coeffs(p, name)
    den = reduce(lcm, (c.denominator for c in coeffs), 1)
    zp = flint.fmpz_poly([int(c * den) for c in coeffs])
    roots = {int(r) for r, _ in zp.roots() if int(r) >= 0}
    return sorted(roots)


def root_bound(p: MultiPoly, name: str) -> int:
    """Cauchy bound: every real root has absolute value below the result."""
    coeffs = univariate_coeffs(p, name)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    lead = coeffs[-1]
    return 1 + int(max((abs(c / lead) for c in coeffs[:-1]), default=0)) + 1


class RationalFunction:
    """Reduced quotient ``num/den`` of polynomials with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _reduced: bool = False):
        if not isinstance(num, flint.fmpq_mpoly):
            num = const_poly(num)
        if den is None:
            self.num, self.den = num, CTX.constant(1)
            return
        if not isinstance(den, flint.fmpq_mpoly):
            den = const_poly(den)
        if den.is_zero():
            raise ArithmeticError_("zero-divisor", "denominator is zero")
        if _reduced:
            self.num, self.den = num, den
            return
        if num.is_zero():
            self.num, self.den = num, CTX.constant(1)
            return
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
        lc = _lc(den)
        if lc != 1:
            num = num / lc
            den = den / lc
        self.num, self.den = num, den

    # construction helpers
    @classmethod
    def from_poly(cls, p: MultiPoly) -> "RationalFunction":
        return cls(p)

    @classmethod
    def parse(cls, text: str) -> "RationalFunction":
        return _eval_ratfun_string(text)

    # predicates
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.den.is_one() and self.num.is_one()

    def is_polynomial(self) -> bool:
        return self.den.is_one()

    def is_constant(self) -> bool:
        return self.den.is_constant() and self.num.is_constant()

    def variables(self) -> set[str]:
        return set(poly_variables(self.num)) | set(poly_variables(self.den))

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ArithmeticError_("not-constant", str(self))
        if self.num.is_zero():
            return Fraction(0)
        return to_fraction(_lc(self.num)) / to_fraction(_lc(self.den))

    # arithmetic
    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, (int, Fraction, flint.fmpq, flint.fmpq_mpoly)):
            return RationalFunction(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.num.is_zero() or other.num.is_zero():
            return RationalFunction(0)
        if self.den.is_one() and other.den.is_one():
            return RationalFunction(self.num * other.num, CTX.constant(1), _reduced=True)
        g1 = self.num.gcd(other.den)
        g2 = other.num.gcd(self.den)
        num = (self.num / g1) * (other.num / g2)
        den = (self.den / g2) * (other.den / g1)
        lc = _lc(den)
        if lc != 1:
            num, den = num / lc, den / lc
        return RationalFunction(num, den, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if self.num.is_zero():
            raise ArithmeticError_("zero-divisor", "inverse of zero")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RationalFunction(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return RationalFunction(self.num ** e, self.den ** e, _reduced=True)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalFunction(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    # calculus and substitution
    def diff(self, name: str) -> "RationalFunction":
        dn = self.num.derivative(name)
        if self.den.is_constant():
            return RationalFunction(dn, self.den, _reduced=True)
        dd = self.den.derivative(name)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def compose(self, mapping: dict[str, MultiPoly]) -> "RationalFunction":
        """Substitute polynomials for variables (e.g. ``{"n": n + 1}``)."""
        if not mapping:
            return self
        args = [mapping.get(name, g) for name, g in zip(VARIABLES, CTX.gens())]
        args = [a if isinstance(a, flint.fmpq_mpoly) else const_poly(a) for a in args]
        num = self.num.compose(*args) if not self.num.is_constant() else self.num
        den = self.den.compose(*args) if not self.den.is_constant() else self.den
        return RationalFunction(num, den)

    def shift(self, name: str, by: int = 1) -> "RationalFunction":
        if by == 0:
            return self
        return self.compose({name: var(name) + by})

    def subs(self, values: dict[str, object]) -> "RationalFunction":
        """Evaluate some variables at exact rationals."""
        vals = {k: _to_fmpq(v) for k, v in values.items()}
        num = self.num.subs(vals)
        den = self.den.subs(vals)
        if den.is_zero():
            raise ArithmeticError_("zero-divisor", f"denominator of {self} vanishes at {values}")
        return RationalFunction(num, den)

    def __call__(self, **values) -> "RationalFunction":
        return self.subs(values)

    def __repr__(self):
        return f"RationalFunction({self})"

    def __str__(self):
        return render_ratfun(self)


RF = RationalFunction


def ratfun_arith(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b.is_zero():
            raise ArithmeticError_("zero-divisor", "division by the zero rational function")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# rendering

def _render_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def render_poly(p: MultiPoly) -> str:
    """Compact deterministic rendering, terms in descending graded-lex order."""
    if p.is_zero():
        return "0"
    parts = []
    for monom, coeff in zip(p.monoms(), p.coeffs()):
        c = to_fraction(coeff)
        factors = []
        for name, e in zip(VARIABLES, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        body = "*".join(factors)
        mag = abs(c)
        if not body:
            term = _render_rational(mag)
        elif mag == 1:
            term = body
        else:
            term = f"{_render_rational(mag)}*{body}"
        parts.append(("-" if c < 0 else "+", term))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, term in parts[1:]:
        out += sign + term
    return out


def _factor_key(item):
    f, e = item
    terms = [(tuple(m), to_fraction(c)) for m, c in zip(f.monoms(), f.coeffs())]
    return (f.total_degree(), [(m, abs(c), c) for m, c in terms], e)


def _factored_parts(p: MultiPoly):
    """Rational content and the text of the sorted, sign-normalized factors."""
    if p.is_constant():
        return to_fraction(p.leading_coefficient()), ""
    content, factors = p.factor()
    content = to_fraction(content)
    fixed = []
    for f, e in factors:
        if to_fraction(f.leading_coefficient()) < 0:
            f = -f
            if e % 2:
                content = -content
        fixed.append((f, int(e)))
    fixed.sort(key=_factor_key)
    pieces = []
    for f, e in fixed:
        body = render_poly(f)
        if len(f.monoms()) > 1:
            body = f"({body})"
        pieces.append(body if e == 1 else f"{body}^{e}")
    return content, "*".join(pieces)


def _with_content(content: Fraction, text: str) -> str:
    if not text:
        return _render_rational(content)
    if content == 1:
        return text
    if content == -1:
        return "-" + text
    return f"{_render_rational(content)}*{text}"


def render_factored(p: MultiPoly) -> str:
    """Render as content times sorted irreducible factors, e.g. ``2*(n+1)*(2*n+3)^2``."""
    if p.is_zero():
        return "0"
    return _with_content(*_factored_parts(p))


def render_ratfun_factored(r: "RationalFunction") -> str:
    """Factored rendering of a quotient; the whole rational content goes upstairs."""
    if r.den.is_one():
        return render_factored(r.num)
    if r.num.is_zero():
        return "0"
    cn, tn = _factored_parts(r.num)
    cd, td = _factored_parts(r.den)
    content = cn / cd
    if not td:
        return _with_content(content, tn)
    sign = "-" if content < 0 else ""
    num = _with_content(Fraction(abs(content.numerator)), tn)
    den = _with_content(Fraction(content.denominator), td)
    den = f"({den})" if _top_level_product(den) else den
    return f"{sign}{num}/{den}"


def _top_level_product(text: str) -> bool:
    depth = 0
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if ch == "*" and depth == 0:
            return True
    return False


def render_ratfun(r: RationalFunction) -> str:
    if r.den.is_one():
        return render_poly(r.num)
    num = render_poly(r.num)
    if len(r.num.monoms()) > 1:
        num = f"({num})"
    den = render_poly(r.den)
    if len(r.den.monoms()) > 1 or not r.den.is_constant():
        den = f"({den})"
    return f"{num}/{den}"


# ---------------------------------------------------------------------------
# tiny string evaluator for tests and fixtures

def _eval_poly_string(text: str) -> MultiPoly:
    r = _eval_ratfun_string(text)
    if not r.is_polynomial():
        raise ArithmeticError_("not-polynomial", text)
    return r.num


def _eval_ratfun_string(text: str) -> RationalFunction:
    import ast

    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return RationalFunction(node.value)
        if isinstance(node, ast.Name):
            return RationalFunction(var(node.id))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev(node.operand)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.UAdd):
            return ev(node.operand)
        if isinstance(node, ast.BinOp):
            a = ev(node.left)
            if isinstance(node.op, ast.Pow):
                e = node.right
                if isinstance(e, ast.Constant) and isinstance(e.value, int):
                    return a ** e.value
                raise ArithmeticError_("bad-expression", text)
            b = ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                return a / b
        raise ArithmeticError_("bad-expression", text)

    return ev(tree)

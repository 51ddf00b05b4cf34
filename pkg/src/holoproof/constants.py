"""Symbolic constants: polynomials in a few transcendental generators with
rational-function coefficients.

Generators are Euler's gamma, log 2, sqrt(pi) (pi is its square, negative
powers allowed), sqrt 2, and the functions sin z, cos z, sinh z, cosh z,
exp z, exp(-z).  Normal form rewrites::

    sin^2  -> 1 - cos^2
    sinh^2 -> cosh^2 - 1
    exp * expm -> 1
    sqrt2^2 -> 2

which makes equality of normal forms decide equality modulo these relations.
"""

from __future__ import annotations

from fractions import Fraction

from .arith import RF, RationalFunction, render_ratfun_factored, var

GENERATORS = ("gamma", "log2", "sqrtpi", "sqrt2", "sin", "cos", "sinh", "cosh", "exp", "expm")
_IDX = {g: i for i, g in enumerate(GENERATORS)}
_G, _L, _S, _R2, _SIN, _COS, _SINH, _COSH, _EXP, _EXPM = range(len(GENERATORS))
_NGEN = len(GENERATORS)
_ONE = (0,) * _NGEN

_RENDER_NAMES = {
    "gamma": "eulergamma", "log2": "log(2)", "sqrtpi": "sqrtpi", "sqrt2": "sqrt(2)",
    "sin": "sin(z)", "cos": "cos(z)", "sinh": "sinh(z)", "cosh": "cosh(z)",
    "exp": "exp(z)", "expm": "exp(-z)",
}


def _mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _reduce_monomial(mono):
    """Rewrite one monomial into a list of (normal monomial, rational factor)."""
    mono = list(mono)
    factor = Fraction(1)
    # exp * expm -> 1
    common = min(mono[_EXP], mono[_EXPM])
    if common:
        mono[_EXP] -= common
        mono[_EXPM] -= common
    # sqrt2^2 -> 2
    if mono[_R2] >= 2:
        q, r = divmod(mono[_R2], 2)
        factor *= 2 ** q
        mono[_R2] = r
    out = [(tuple(mono), factor)]
    # sin^2 -> 1 - cos^2, sinh^2 -> cosh^2 - 1, applied until degree <= 1
    for hi, lo, sign in ((_SIN, _COS, -1), (_SINH, _COSH, 1)):
        changed = True
        while changed:
            changed = False
            nxt = []
            for m, f in out:
                if m[hi] >= 2:
                    changed = True
                    base = list(m)
                    base[hi] -= 2
                    a = list(base)
                    a[lo] += 2
                    # sin^2 = 1 - cos^2 ;  sinh^2 = cosh^2 - 1
                    if sign < 0:
                        nxt.append((tuple(base), f))
                        nxt.append((tuple(a), -f))
                    else:
                        nxt.append((tuple(a), f))
                        nxt.append((tuple(base), -f))
                else:
                    nxt.append((m, f))
            out = nxt
    return out


class ConstantExpr:
    """Element of Q(vars)[gamma, log2, sqrtpi^(+-1), sqrt2, sin, cos, ...] in normal form."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        acc: dict[tuple, RationalFunction] = {}
        if terms:
            for mono, coeff in terms.items():
                if not isinstance(coeff, RationalFunction):
                    coeff = RF(coeff)
                if coeff.is_zero():
                    continue
                for m, f in _reduce_monomial(mono):
                    c = coeff * f if f != 1 else coeff
                    prev = acc.get(m)
                    acc[m] = c if prev is None else prev + c
        self.terms = {m: c for m, c in acc.items() if not c.is_zero()}

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def const(cls, value) -> "ConstantExpr":
        c = value if isinstance(value, RationalFunction) else RF(value)
        return cls._raw({} if c.is_zero() else {_ONE: c})

    @classmethod
    def gen(cls, name: str, power: int = 1) -> "ConstantExpr":
        m = [0] * _NGEN
        m[_IDX[name]] = power
        return cls({tuple(m): RF(1)})

    @classmethod
    def coerce(cls, value) -> "ConstantExpr":
        if isinstance(value, ConstantExpr):
            return value
        return cls.const(value)

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(m == _ONE for m in self.terms)

    def rational_part(self) -> RationalFunction:
        return self.terms.get(_ONE, RF(0))

    def as_rational(self) -> RationalFunction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational function")
        return self.rational_part()

    def generators_used(self) -> set[str]:
        used = set()
        for m in self.terms:
            used.update(g for g, e in zip(GENERATORS, m) if e)
        return used

    def __add__(self, other):
        other = ConstantExpr.coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        acc = dict(self.terms)
        for m, c in other.terms.items():
            prev = acc.get(m)
            s = c if prev is None else prev + c
            if s.is_zero():
                acc.pop(m, None)
            else:
                acc[m] = s
        return ConstantExpr._raw(acc)

    __radd__ = __add__

    def __neg__(self):
        return ConstantExpr._raw({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-ConstantExpr.coerce(other))

    def __rsub__(self, other):
        return ConstantExpr.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (RationalFunction, int, Fraction)):
            c = other if isinstance(other, RationalFunction) else RF(other)
            if c.is_zero():
                return ConstantExpr._raw({})
            return ConstantExpr._raw({m: v * c for m, v in self.terms.items()})
        other = ConstantExpr.coerce(other)
        acc: dict[tuple, RationalFunction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                c = c1 * c2
                for m, f in _reduce_monomial(_mono_mul(m1, m2)):
                    cc = c * f if f != 1 else c
                    prev = acc.get(m)
                    acc[m] = cc if prev is None else prev + cc
        return ConstantExpr._raw({m: c for m, c in acc.items() if not c.is_zero()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ConstantExpr):
            if not other.is_monomial():
                raise ZeroDivisionError("division by a non-monomial constant")
            (m, c), = other.terms.items()
            return self * _monomial_inverse(m) * c.inverse()
        c = other if isinstance(other, RationalFunction) else RF(other)
        return self * c.inverse()

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __pow__(self, e: int):
        out = ConstantExpr.const(1)
        for _ in range(e):
            out = out * self
        return out

    def map_coeffs(self, fn) -> "ConstantExpr":
        return ConstantExpr({m: fn(c) for m, c in self.terms.items()})

    def subs(self, values) -> "ConstantExpr":
        return self.map_coeffs(lambda c: c.subs(values))

    def compose(self, mapping) -> "ConstantExpr":
        return self.map_coeffs(lambda c: c.compose(mapping))

    def diff_z(self) -> "ConstantExpr":
        """Derivative in z; the function generators are functions of z."""
        out = ConstantExpr._raw({})
        for m, c in self.terms.items():
            out = out + ConstantExpr({m: c.diff("z")})
            for gi, dg in _DERIVS.items():
                e = m[gi]
                if e:
                    rest = list(m)
                    rest[gi] -= 1
                    out = out + ConstantExpr({tuple(rest): c * e}) * dg()
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, RationalFunction)):
            other = ConstantExpr.const(other)
        if not isinstance(other, ConstantExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(str(self))

    def __repr__(self):
        return f"ConstantExpr({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda mm: (sum(abs(e) for e in mm), mm)):
            c = self.terms[m]
            gens = []
            for g, e in zip(GENERATORS, m):
                if e == 1:
                    gens.append(_RENDER_NAMES[g])
                elif e:
                    gens.append(f"{_RENDER_NAMES[g]}^{e}")
            cs = render_ratfun_factored(c)
            if not gens:
                parts.append(cs)
            elif c.is_one():
                parts.append("*".join(gens))
            elif (-c).is_one():
                parts.append("-" + "*".join(gens))
            else:
                if _has_top_level_sum(cs):
                    cs = f"({cs})"
                parts.append(f"{cs}*" + "*".join(gens))
        return " + ".join(parts).replace("+ -", "- ")


def _has_top_level_sum(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > 0:
            return True
    return False


def _monomial_inverse(m) -> "ConstantExpr":
    inv = [0] * _NGEN
    factor = Fraction(1)
    for i, e in enumerate(m):
        if not e:
            continue
        if i == _S:
            inv[i] = -e
        elif i == _R2:
            inv[i] = e
            factor /= 2 ** e
        elif i == _EXP:
            inv[_EXPM] += e
        elif i == _EXPM:
            inv[_EXP] += e
        else:
            raise ZeroDivisionError(f"cannot invert {GENERATORS[i]}")
    return ConstantExpr({tuple(inv): RF(factor)})


def constexpr_is_zero(e: ConstantExpr) -> bool:
    return e.is_zero()


CE = ConstantExpr
ZERO = ConstantExpr._raw({})
ONE = ConstantExpr.const(1)
EULER_GAMMA = CE.gen("gamma")
LOG2 = CE.gen("log2")
SQRTPI = CE.gen("sqrtpi")
PI = CE.gen("sqrtpi", 2)
SQRT2 = CE.gen("sqrt2")
SIN = CE.gen("sin")
COS = CE.gen("cos")
SINH = CE.gen("sinh")
COSH = CE.gen("cosh")
EXP = CE.gen("exp")
EXPM = CE.gen("expm")

_DERIVS = {
    _SIN: lambda: COS,
    _COS: lambda: -SIN,
    _SINH: lambda: COSH,
    _COSH: lambda: SINH,
    _EXP: lambda: EXP,
    _EXPM: lambda: -EXPM,
}


def sin_multiple(m: int) -> ConstantExpr:
    """sin(m z) as a polynomial in sin z, cos z."""
    s, c = _multiple_angle(m)
    return s


def cos_multiple(m: int) -> ConstantExpr:
    s, c = _multiple_angle(m)
    return c


def _multiple_angle(m: int):
    if m < 0:
        s, c = _multiple_angle(-m)
        return -s, c
    s, c = ZERO, ONE
    for _ in range(m):
        s, c = s * COS + c * SIN, c * COS - s * SIN
    return s, c


def zvar() -> RationalFunction:
    return RF(var("z"))


def _hyperbolic_multiple(m: int):
    if m < 0:
        s, c = _hyperbolic_multiple(-m)
        return -s, c
    s, c = ZERO, ONE
    for _ in range(m):
        s, c = s * COSH + c * SINH, c * COSH + s * SINH
    return s, c


def dilate(e: ConstantExpr, m: int) -> ConstantExpr:
    """e with z replaced by m*z (m a nonzero integer)."""
    if m == 1:
        return e
    if m == 0:
        raise ValueError("dilation by zero")
    s, c = _multiple_angle(m)
    sh, ch = _hyperbolic_multiple(m)
    images = {_SIN: s, _COS: c, _SINH: sh, _COSH: ch,
              _EXP: EXP ** m if m > 0 else EXPM ** -m,
              _EXPM: EXPM ** m if m > 0 else EXP ** -m}
    zm = {"z": var("z") * m}
    out = ZERO
    for mono, coeff in e.terms.items():
        piece = ConstantExpr({tuple(x if i not in images else 0 for i, x in enumerate(mono)): coeff.compose(zm)})
        for gi, img in images.items():
            if mono[gi]:
                piece = piece * img ** mono[gi]
        out = out + piece
    return out

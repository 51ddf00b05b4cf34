"""Hypergeometric terms as explicit products of factorials and powers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .arith import RF, RationalFunction, var
from .constants import CE, ConstantExpr


@dataclass(frozen=True)
class Linear:
    """a*n + b*k + c with integer coefficients (variable names fixed by the term)."""

    a: int = 0
    b: int = 0
    c: int = 0

    def at(self, n: int, k: int) -> int:
        return self.a * n + self.b * k + self.c

    def shifted(self, dn: int, dk: int) -> "Linear":
        return Linear(self.a, self.b, self.c + self.a * dn + self.b * dk)

    def offset_from(self, other: "Linear"):
        if (self.a, self.b) != (other.a, other.b):
            return None
        return self.c - other.c

    def poly(self, nv: str, kv: str) -> RationalFunction:
        return RF(var(nv) * self.a + var(kv) * self.b + self.c)

    def substitute_k(self, u: int, v: int) -> "Linear":
        """Replace k by u*n + v."""
        return Linear(self.a + self.b * u, 0, self.c + self.b * v)


class HyperError(ValueError):
    pass


@dataclass(frozen=True)
class HyperProduct:
    """const * prod (lin_i)!^e_i * prod base_j^(lin_j).

    ``bases`` are rational functions free of the two index variables (for example
    ``z`` or ``-2``); their exponents are linear in the indices.
    """

    nvar: str = "n"
    kvar: str = "k"
    const: Fraction = Fraction(1)
    factorials: tuple = ()          # ((Linear, exponent), ...)
    powers: tuple = ()              # ((RationalFunction, Linear), ...)
    extra: RationalFunction = field(default_factory=lambda: RF(1))

    # ------------------------------------------------------------------
    def ratio(self, dn: int, dk: int) -> RationalFunction:
        """h(n+dn, k+dk) / h(n, k) as a rational function."""
        nv, kv = self.nvar, self.kvar
        out = RF(1)
        for lin, e in self.factorials:
            s = lin.a * dn + lin.b * dk
            out = out * _factorial_quotient(lin.poly(nv, kv), s) ** e
        for base, lin in self.powers:
            s = lin.a * dn + lin.b * dk
            out = out * base ** s
        sub = {}
        if dn:
            sub[nv] = var(nv) + dn
        if dk:
            sub[kv] = var(kv) + dk
        out = out * self.extra.compose(sub) / self.extra
        return out

    @property
    def ratio_n(self) -> RationalFunction:
        return self.ratio(1, 0)

    @property
    def ratio_k(self) -> RationalFunction:
        return self.ratio(0, 1)

    def log_derivative(self, zv: str) -> RationalFunction:
        """(d/dz h) / h for bases depending on z."""
        out = RF(0)
        for base, lin in self.powers:
            db = base.diff(zv)
            if not db.is_zero():
                out = out + lin.poly(self.nvar, self.kvar) * db / base
        d_extra = self.extra.diff(zv)
        if not d_extra.is_zero():
            out = out + d_extra / self.extra
        return out

    def value(self, n: int, k: int):
        """Exact value (a ConstantExpr); zero when a reciprocal factorial has a
        negative argument; raises on genuine poles."""
        val = CE.const(self.const)
        zero = False
        for lin, e in self.factorials:
            m = lin.at(n, k)
            if m < 0:
                if e < 0:
                    zero = True
                    continue
                raise HyperError(f"pole: ({m})! in numerator")
            val = val * CE.const(Fraction(factorial(m)) ** e)
        if zero:
            return CE.const(0)
        for base, lin in self.powers:
            val = val * base ** lin.at(n, k)
        ev = self.extra.subs({self.nvar: n, self.kvar: k})
        return val * ev

    def substitute_k(self, u: int, v: int) -> "HyperProduct":
        """The univariate term n -> h(n, u*n + v)."""
        fac = tuple((lin.substitute_k(u, v), e) for lin, e in self.factorials)
        pw = tuple((b, lin.substitute_k(u, v)) for b, lin in self.powers)
        ex = self.extra.compose({self.kvar: var(self.nvar) * u + v})
        return HyperProduct(self.nvar, self.kvar, self.const, fac, pw, ex)

    def quotient(self, other: "HyperProduct") -> RationalFunction:
        """self / other as a rational function when all factors pair up with
        integer offsets."""
        out = RF(self.const) / RF(other.const)
        nv, kv = self.nvar, self.kvar
        mine = list(self.factorials)
        theirs = list(other.factorials)
        for lin, e in mine:
            out = out * _pair_factorial(lin, e, theirs, nv, kv)
        for lin, e in theirs:
            if e:
                raise HyperError(f"unpaired factorial {lin} in quotient")
        my_pw = list(self.powers)
        their_pw = list(other.powers)
        for base, lin in my_pw:
            for idx, (b2, l2) in enumerate(their_pw):
                if b2 == base and l2 is not None and (l2.a, l2.b) == (lin.a, lin.b):
                    out = out * base ** (lin.c - l2.c)
                    their_pw[idx] = (b2, None)
                    break
            else:
                raise HyperError(f"unpaired power {base}^{lin}")
        if any(l is not None for _, l in their_pw):
            raise HyperError("unpaired power in quotient")
        return out * self.extra / other.extra


def _factorial_quotient(x: RationalFunction, s: int) -> RationalFunction:
    """(x + s)! / x!"""
    out = RF(1)
    if s >= 0:
        for i in range(1, s + 1):
            out = out * (x + i)
    else:
        for i in range(0, -s):
            out = out / (x - i)
    return out


def _pair_factorial(lin, e, theirs, nv, kv):
    for idx, (l2, e2) in enumerate(theirs):
        if e2 == 0:
            continue
        off = lin.offset_from(l2)
        if off is None:
            continue
        take = e if (e > 0) == (e2 > 0) else 0
        if not take:
            continue
        step = 1 if e > 0 else -1
        amount = min(abs(e), abs(e2))
        theirs[idx] = (l2, e2 - step * amount)
        q = _factorial_quotient(l2.poly(nv, kv), off) ** (step * amount)
        rest = e - step * amount
        if rest:
            return q * _pair_factorial(lin, rest, theirs, nv, kv)
        return q
    raise HyperError(f"unpaired factorial {lin}")


def binomial_factors(top: Linear, bottom: Linear):
    """Factorial factors of C(top, bottom)."""
    diff = Linear(top.a - bottom.a, top.b - bottom.b, top.c - bottom.c)
    return ((top, 1), (bottom, -1), (diff, -1))


@dataclass(frozen=True)
class HyperTerm:
    """A hypergeometric term h(n, k) described by its shift quotients.

    ``product`` (optional) gives an explicit closed form used for exact
    evaluation and boundary terms.
    """

    ratio_n: RationalFunction
    ratio_k: RationalFunction
    nvar: str = "n"
    kvar: str = "k"
    product: HyperProduct | None = None
    base_value: str = ""

    @classmethod
    def from_product(cls, p: HyperProduct, description: str = "") -> "HyperTerm":
        return cls(p.ratio_n, p.ratio_k, p.nvar, p.kvar, p, description)

    def compatible(self) -> bool:
        nv, kv = self.nvar, self.kvar
        lhs = self.ratio_n.shift(kv, 1) * self.ratio_k
        rhs = self.ratio_k.shift(nv, 1) * self.ratio_n
        return lhs == rhs

    def shift_ratio(self, dn: int, dk: int = 0) -> RationalFunction:
        """h(n+dn, k+dk)/h(n, k) from the quotients (dn, dk >= 0)."""
        out = RF(1)
        for i in range(dn):
            out = out * self.ratio_n.shift(self.nvar, i)
        for j in range(dk):
            out = out * self.ratio_k.compose({self.nvar: var(self.nvar) + dn, self.kvar: var(self.kvar) + j})
        return out

    def value(self, n: int, k: int) -> ConstantExpr:
        if self.product is None:
            raise HyperError("no closed form attached")
        return self.product.value(n, k)

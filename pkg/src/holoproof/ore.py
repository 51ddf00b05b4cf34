"""Ore operators in one shift or derivation with rational-function coefficients."""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import comb

from .arith import (RF, RationalFunction, poly_content_rational, render_ratfun_factored, to_fraction,
                    CTX)
from .linalg import first_dependency

SHIFT = "shift"
DIFF = "diff"


class OreError(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


def _as_rf(c) -> RationalFunction:
    if isinstance(c, RationalFunction):
        return c
    if isinstance(c, str):
        return RF.parse(c)
    return RF(c)


class OreOperator:
    """sum_i coeffs[i] * d^i where d is S_var (shift) or D_var (derivation)."""

    __slots__ = ("kind", "var", "coeffs")

    def __init__(self, kind: str, var_name: str, coeffs):
        if kind not in (SHIFT, DIFF):
            raise OreError("bad-kind", kind)
        cs = [_as_rf(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.kind = kind
        self.var = var_name
        self.coeffs = tuple(cs)

    @classmethod
    def parse(cls, kind: str, var_name: str, coeffs: list[str]) -> "OreOperator":
        return cls(kind, var_name, [RF.parse(c) for c in coeffs])

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> RationalFunction:
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def symbol(self) -> str:
        return "S" if self.kind == SHIFT else "D"

    def _check(self, other: "OreOperator"):
        if self.kind != other.kind or self.var != other.var:
            raise OreError("incompatible-operators",
                           f"{self.kind}[{self.var}] vs {other.kind}[{other.var}]")

    # coefficient twisting
    def sigma(self, c: RationalFunction, times: int = 1) -> RationalFunction:
        return c.shift(self.var, times) if self.kind == SHIFT else c

    def __add__(self, other: "OreOperator") -> "OreOperator":
        self._check(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [RF(0)] * (n - len(self.coeffs))
        b = list(other.coeffs) + [RF(0)] * (n - len(other.coeffs))
        return OreOperator(self.kind, self.var, [x + y for x, y in zip(a, b)])

    def __neg__(self):
        return OreOperator(self.kind, self.var, [-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, r) -> "OreOperator":
        """Left multiplication by a rational function."""
        r = _as_rf(r)
        return OreOperator(self.kind, self.var, [r * c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, OreOperator):
            return mul(self, other)
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, OreOperator):
            return NotImplemented
        return (self.kind, self.var, self.coeffs) == (other.kind, other.var, other.coeffs)

    def __hash__(self):
        return hash((self.kind, self.var, self.coeffs))

    def __repr__(self):
        return f"OreOperator({self.kind}, {self.var}, {render(self)})"

    def __str__(self):
        return render(self)

    def variables(self) -> set[str]:
        out = set()
        for c in self.coeffs:
            out |= c.variables()
        return out

    def substitute(self, mapping) -> "OreOperator":
        return OreOperator(self.kind, self.var, [c.compose(mapping) for c in self.coeffs])


def shift_op(var_name: str, coeffs) -> OreOperator:
    return OreOperator(SHIFT, var_name, coeffs)


def diff_op(var_name: str, coeffs) -> OreOperator:
    return OreOperator(DIFF, var_name, coeffs)


def make_monomial(kind: str, var_name: str, i: int, c=1) -> OreOperator:
    return OreOperator(kind, var_name, [RF(0)] * i + [_as_rf(c)])


# ---------------------------------------------------------------------------
# normalization

def clear_denominators(op: OreOperator) -> OreOperator:
    if op.is_zero():
        raise OreError("zero-operator")
    den = reduce(lambda a, b: a * b / a.gcd(b) if not a.is_one() else b,
                 (c.den for c in op.coeffs), CTX.constant(1))
    return OreOperator(op.kind, op.var, [RF(c.num * (den / c.den)) for c in op.coeffs])


def _sign_fix(op: OreOperator) -> OreOperator:
    lead = op.leading.num
    if to_fraction(lead.leading_coefficient()) < 0:
        return -op
    return op


def normalize(op: OreOperator) -> OreOperator:
    """Polynomial coefficients, rational content 1, leading term of the
    leading coefficient positive."""
    op = clear_denominators(op)
    cont = reduce(lambda a, b: Fraction(_gcd_frac(a, b)),
                  (poly_content_rational(c.num) for c in op.coeffs if not c.is_zero()))
    if cont != 1:
        op = op.scale(RF(1) / RF(cont))
    return _sign_fix(op)


def _gcd_frac(a: Fraction, b: Fraction) -> Fraction:
    from math import gcd, lcm
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def primitive(op: OreOperator) -> OreOperator:
    """Like :func:`normalize` but also removes the polynomial gcd of the coefficients."""
    op = clear_denominators(op)
    g = reduce(lambda a, b: a.gcd(b), (c.num for c in op.coeffs if not c.is_zero()))
    if not g.is_constant():
        op = OreOperator(op.kind, op.var, [RF(c.num / g) for c in op.coeffs])
    return normalize(op)


def make_monic(op: OreOperator) -> OreOperator:
    inv = op.leading.inverse()
    return OreOperator(op.kind, op.var, [c * inv for c in op.coeffs])


def equivalent(a: OreOperator, b: OreOperator) -> bool:
    """Equal up to a left rational-function factor."""
    if a.kind != b.kind or a.var != b.var or a.order != b.order:
        return False
    return make_monic(a).coeffs == make_monic(b).coeffs


# ---------------------------------------------------------------------------
# multiplication

def _apply_d_power_to_coeff(op_kind, v, i, c):
    """d^i * c as a list of coefficients (of d^0..d^i)."""
    if op_kind == SHIFT:
        return [RF(0)] * i + [c.shift(v, i)]
    out = [RF(0)] * (i + 1)
    deriv = c
    for l in range(i + 1):
        if deriv.is_zero():
            break
        out[i - l] = out[i - l] + deriv * comb(i, l)
        deriv = deriv.diff(v)
    return out


def mul(a: OreOperator, b: OreOperator) -> OreOperator:
    a._check(b)
    if a.is_zero() or b.is_zero():
        return OreOperator(a.kind, a.var, [])
    out = [RF(0)] * (a.order + b.order + 1)
    for i, ai in enumerate(a.coeffs):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b.coeffs):
            if bj.is_zero():
                continue
            for l, t in enumerate(_apply_d_power_to_coeff(a.kind, a.var, i, bj)):
                if not t.is_zero():
                    out[l + j] = out[l + j] + ai * t
    return OreOperator(a.kind, a.var, out)


# ---------------------------------------------------------------------------
# modules: the workhorse behind lclm and the closure properties

class FiniteModule:
    """A finite-dimensional Q(vars)-vector space with a twisted action of d.

    ``matrix[j]`` is the image d(e_j) as a coordinate vector; for a shift the
    action is sigma-semilinear, for a derivation it obeys Leibniz.
    """

    def __init__(self, kind: str, var_name: str, matrix: list[list[RationalFunction]]):
        self.kind = kind
        self.var = var_name
        self.dim = len(matrix)
        self.matrix = matrix

    def act(self, vec: list[RationalFunction]) -> list[RationalFunction]:
        out = [RF(0)] * self.dim
        for j, c in enumerate(vec):
            if c.is_zero():
                continue
            if self.kind == SHIFT:
                cs = c.shift(self.var, 1)
            else:
                cs = c
                dc = c.diff(self.var)
                if not dc.is_zero():
                    out[j] = out[j] + dc
            for i, m in enumerate(self.matrix[j]):
                if not m.is_zero():
                    out[i] = out[i] + cs * m
        return out

    def orbit(self, vec):
        while True:
            yield vec
            vec = self.act(vec)

    def annihilator(self, vec, max_order: int | None = None) -> OreOperator:
        limit = (self.dim + 1) if max_order is None else max_order + 1
        found = first_dependency(self.orbit(vec), limit)
        if found is None:
            raise OreError("order-exhausted", f"no relation up to order {limit - 1}")
        N, c = found
        return primitive(OreOperator(self.kind, self.var, [-x for x in c] + [RF(1)]))


def companion(op: OreOperator) -> FiniteModule:
    """Module Q(vars)[d]/Q(vars)[d]·op with basis e_i = d^i."""
    d = op.order
    if d < 1:
        raise OreError("order-zero", "companion module of an order-0 operator")
    lead = op.leading
    matrix = []
    for j in range(d):
        col = [RF(0)] * d
        if j + 1 < d:
            col[j + 1] = RF(1)
        else:
            for i in range(d):
                col[i] = -op.coeffs[i] / lead
        matrix.append(col)
    return FiniteModule(op.kind, op.var, matrix)


def direct_sum(m1: FiniteModule, m2: FiniteModule) -> FiniteModule:
    d1, d2 = m1.dim, m2.dim
    matrix = [list(col) + [RF(0)] * d2 for col in m1.matrix]
    matrix += [[RF(0)] * d1 + list(col) for col in m2.matrix]
    return FiniteModule(m1.kind, m1.var, matrix)


def tensor(m1: FiniteModule, m2: FiniteModule) -> FiniteModule:
    """Tensor product: for a shift d(e x f) = de x df, for a derivation Leibniz."""
    d1, d2 = m1.dim, m2.dim
    matrix = []
    for a in range(d1):
        for b in range(d2):
            col = [RF(0)] * (d1 * d2)
            if m1.kind == SHIFT:
                for i in range(d1):
                    x = m1.matrix[a][i]
                    if x.is_zero():
                        continue
                    for j in range(d2):
                        y = m2.matrix[b][j]
                        if not y.is_zero():
                            col[i * d2 + j] = col[i * d2 + j] + x * y
            else:
                for i in range(d1):
                    x = m1.matrix[a][i]
                    if not x.is_zero():
                        col[i * d2 + b] = col[i * d2 + b] + x
                for j in range(d2):
                    y = m2.matrix[b][j]
                    if not y.is_zero():
                        col[a * d2 + j] = col[a * d2 + j] + y
            matrix.append(col)
    return FiniteModule(m1.kind, m1.var, matrix)


def unit_vector(dim: int, i: int = 0):
    v = [RF(0)] * dim
    v[i] = RF(1)
    return v


def lclm(a: OreOperator, b: OreOperator) -> OreOperator:
    """Least common left multiple (minimal order, primitive)."""
    a._check(b)
    if a.order == 0:
        return primitive(b) if b.order > 0 else primitive(a)
    if b.order == 0:
        return primitive(a)
    m = direct_sum(companion(a), companion(b))
    v = unit_vector(m.dim, 0)
    v[a.order] = RF(1)
    return m.annihilator(v)


# ---------------------------------------------------------------------------
# application

def apply_to_sequence(op: OreOperator, seq: list, start: int = 0) -> list:
    """Apply a shift operator to terms seq[i] = f(start + i); returns values for
    indices start .. start+len(seq)-ord-1."""
    if op.kind != SHIFT:
        raise OreError("incompatible-operators", "sequence application needs a shift operator")
    d = op.order
    if len(seq) <= d:
        raise OreError("order-underflow", f"need more than {d} terms")
    out = []
    for idx in range(len(seq) - d):
        n = start + idx
        acc = None
        for i, c in enumerate(op.coeffs):
            if c.is_zero():
                continue
            cv = c.subs({op.var: n})
            term = seq[idx + i] * cv.constant_value() if cv.is_constant() else seq[idx + i] * cv
            acc = term if acc is None else acc + term
        out.append(acc if acc is not None else 0 * seq[0])
    return out


def apply(op, f, **kw):
    """Apply an operator (or inhomogeneous relation) to a coefficient list or a series."""
    from .series import SymbolicSeries, series_apply
    from .relations import InhomogeneousRelation
    if isinstance(op, InhomogeneousRelation):
        return op.residual(f, **kw)
    if isinstance(f, SymbolicSeries):
        return series_apply(op, f)
    return apply_to_sequence(op, list(f), **kw)


# ---------------------------------------------------------------------------
# rendering

def render_coeff(c: RationalFunction) -> str:
    return render_ratfun_factored(c)


def _needs_parens(text: str) -> bool:
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > 0:
            return True
    return False


def render(op: OreOperator) -> str:
    """Canonical text: ascending terms ``coef*S^i`` joined by `` + `` / `` - ``."""
    if op.is_zero():
        return "0"
    sym = op.symbol()
    pieces = []
    for i, c in enumerate(op.coeffs):
        if c.is_zero():
            continue
        negative = False
        body = render_coeff(c)
        if body.startswith("-") and not _needs_parens(body[1:]):
            negative = True
            body = body[1:]
        if _needs_parens(body):
            body = f"({body})"
        term = f"{sym}^{i}" if body == "1" else f"{body}*{sym}^{i}"
        pieces.append((negative, term))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for negative, term in pieces[1:]:
        out += (" - " if negative else " + ") + term
    return out

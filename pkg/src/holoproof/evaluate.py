"""Turning spec expressions into exact objects.

Three views of an expression are used by the strategies:

* ``closed(node, env)``: an exact :class:`ConstantExpr` once the index
  variables in ``env`` are fixed to integers;
* ``sequence(node, index)``: a P-recursive sequence (annihilating recurrence
  plus exact terms);
* ``function(node, var)``: a function of ``var`` with a truncated series and,
  where available, an annihilating differential operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable

from .arith import RF, RationalFunction, poly_coeff_in, poly_degree, poly_variables, to_fraction, var
from .closure import algebraic_compose, de_plus, de_product, re2de, re_cauchy, re_hadamard, re_plus, re_shift
from .constants import (CE, COS, COSH, EULER_GAMMA, EXP, LOG2, ONE, PI, SIN, SINH, SQRT2, SQRTPI, ZERO,
                        ConstantExpr, dilate)
from .dsl import Bin, Call, ListNode, Name, Neg, Node, Num, OpSym, node_rational
from .hyper import Linear
from .linalg import first_dependency
from .ore import DIFF, SHIFT, FiniteModule, OreOperator, companion, mul, primitive, unit_vector
from .series import (SeriesError, SymbolicSeries, bessel_i_dnu_series, ci_series, djnu_series, dynu_series,
                     e1_series, ei_series, expand_constexpr, gamma_half_integer, harmonic, modified_spherical,
                     psi_half_integer, psi_integer, si_series, spherical_j, spherical_y)


class EvalError(ValueError):
    def __init__(self, code: str, message: str = "", node: Node | None = None):
        loc = getattr(node, "loc", (0, 0)) if node is not None else (0, 0)
        where = f"{loc[0]}:{loc[1]}: " if loc != (0, 0) else ""
        super().__init__(f"{where}{code}: {message}" if message else f"{where}{code}")
        self.code = code


RATIONAL_VARS = {"n", "k", "j", "m", "z", "t", "c", "a", "g", "x"}


# ---------------------------------------------------------------------------
# tree helpers

def substitute(node: Node, mapping: dict) -> Node:
    """Replace free names by nodes (bound sum/gf indices are respected)."""
    if isinstance(node, Name):
        return mapping.get(node.id, node)
    if isinstance(node, Bin):
        return Bin(node.op, substitute(node.left, mapping), substitute(node.right, mapping), node.loc)
    if isinstance(node, Neg):
        return Neg(substitute(node.operand, mapping), node.loc)
    if isinstance(node, Call):
        if node.func in ("sum", "gf"):
            inner = {k: v for k, v in mapping.items() if k != node.args[0].id}
            return Call(node.func, (node.args[0],) + tuple(substitute(a, inner) for a in node.args[1:]), node.loc)
        return Call(node.func, tuple(substitute(a, mapping) for a in node.args), node.loc)
    if isinstance(node, ListNode):
        return ListNode(tuple(substitute(a, mapping) for a in node.items), node.loc)
    return node


def free_names(node: Node) -> set:
    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, Bin):
        return free_names(node.left) | free_names(node.right)
    if isinstance(node, Neg):
        return free_names(node.operand)
    if isinstance(node, Call):
        out = set()
        for a in node.args[1:] if node.func in ("sum", "gf") else node.args:
            out |= free_names(a)
        if node.func in ("sum", "gf"):
            out.discard(node.args[0].id)
        return out
    if isinstance(node, OpSym):
        return {node.var}
    return set()


def to_rf(node: Node) -> RationalFunction | None:
    """The expression as a rational function, or None if it is not one."""
    if isinstance(node, Num):
        return RF(node.value)
    if isinstance(node, Name):
        return RF(var(node.id)) if node.id in RATIONAL_VARS else None
    if isinstance(node, Neg):
        r = to_rf(node.operand)
        return None if r is None else -r
    if isinstance(node, Bin):
        a = to_rf(node.left)
        if a is None:
            return None
        if node.op == "^":
            e = node_rational(node.right)
            if e is None or e.denominator != 1:
                return None
            if a.is_zero() and e < 0:
                return None
            return a ** int(e) if e >= 0 else (RF(1) / a) ** int(-e)
        b = to_rf(node.right)
        if b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return None if b.is_zero() else a / b
    return None


def to_linear(node: Node, nv: str, kv: str) -> Linear | None:
    """a*nv + b*kv + c with integer a, b, c, or None."""
    r = to_rf(node)
    if r is None or not r.is_polynomial() or not r.variables() <= {nv, kv}:
        return None
    vals = []
    rest = r
    for name in (nv, kv):
        if name in rest.variables():
            parts = poly_coeff_in(rest.num, name)
            if max(parts) > 1 or not RF(parts[1]).is_constant():
                return None
            vals.append(RF(parts[1]).constant_value())
            rest = RF(parts.get(0, rest.num * 0))
        else:
            vals.append(Fraction(0))
    if not rest.is_constant():
        return None
    vals.append(rest.constant_value())
    if any(v.denominator != 1 for v in vals):
        return None
    return Linear(*(int(v) for v in vals))


def _dilation(node: Node, v: str = "z") -> int:
    """m for an argument of the form m*v."""
    r = to_rf(node)
    if r is None:
        raise EvalError("unsupported-expression", "argument must be an integer multiple of z", node)
    q = r / RF(var(v))
    if not q.is_constant() or q.constant_value().denominator != 1 or q.is_zero():
        raise EvalError("unsupported-expression", "argument must be an integer multiple of z", node)
    return int(q.constant_value())


def _int_value(node: Node, env: dict) -> Fraction:
    v = closed(node, env)
    if not v.is_rational():
        raise EvalError("not-numeric", "expected a number", node)
    r = v.as_rational()
    if not r.is_constant():
        raise EvalError("not-numeric", "expected a number", node)
    return r.constant_value()


# ---------------------------------------------------------------------------
# exact values

def legendre_poly(m: int, x: str) -> RationalFunction:
    if m < 0:
        m = -m - 1
    p0, p1 = RF(1), RF(var(x))
    if m == 0:
        return p0
    for i in range(1, m):
        p0, p1 = p1, (RF(var(x)) * p1 * (2 * i + 1) - p0 * i) / (i + 1)
    return p1


def _gamma_value(x: Fraction) -> ConstantExpr:
    if x.denominator == 1:
        if x <= 0:
            raise EvalError("pole", f"gamma({x})")
        return CE.const(factorial(int(x) - 1))
    if x.denominator == 2:
        j = x - Fraction(3, 2)
        if j < -1:
            # Gamma(x) = Gamma(x+1)/x
            return _gamma_value(x + 1) * RF(1 / x)
        return gamma_half_integer(int(j))
    raise EvalError("unsupported-expression", f"gamma({x})")


def _psi_value(x: Fraction) -> ConstantExpr:
    if x.denominator == 1:
        if x <= 0:
            raise EvalError("pole", f"psi({x})")
        return psi_integer(int(x))
    if x.denominator == 2:
        j = x - Fraction(3, 2)
        if j < -1:
            return _psi_value(x + 1) - CE.const(1 / x)
        return psi_half_integer(int(j))
    raise EvalError("unsupported-expression", f"psi({x})")


def _sqrt_value(node: Node, env: dict) -> ConstantExpr:
    if isinstance(node, Bin) and node.op in ("*", "/"):
        a, b = _sqrt_value(node.left, env), _sqrt_value(node.right, env)
        return a * b if node.op == "*" else a / b
    if isinstance(node, Name) and node.id == "pi":
        return SQRTPI
    q = node_rational(node)
    if q is None or q <= 0:
        raise EvalError("unsupported-expression", "sqrt of this argument", node)
    out = CE.const(1)
    for part, sign in ((q.numerator, 1), (q.denominator, -1)):
        twos = 0
        while part % 2 == 0:
            part //= 2
            twos += 1
        root = int(round(part ** 0.5))
        if root * root != part:
            raise EvalError("unsupported-expression", f"sqrt({q})", node)
        val = CE.const(Fraction(2 ** (twos // 2) * root))
        if twos % 2:
            val = val * SQRT2
        out = out * val if sign > 0 else out / val
    return out


_ELEMENTARY = {"sin": (SIN, "trig"), "cos": (COS, "trig"), "sinh": (SINH, "hyp"), "cosh": (COSH, "hyp"),
               "exp": (EXP, "exp")}


def closed(node: Node, env: dict | None = None) -> ConstantExpr:
    """Exact value with the names in ``env`` bound to integers."""
    env = env or {}
    if isinstance(node, Num):
        return CE.const(node.value)
    if isinstance(node, Name):
        if node.id in env:
            return CE.const(env[node.id])
        if node.id == "pi":
            return PI
        if node.id == "eulergamma":
            return EULER_GAMMA
        if node.id == "sqrtpi":
            return SQRTPI
        if node.id in RATIONAL_VARS:
            return CE.const(RF(var(node.id)))
        raise EvalError("not-closed-form", f"'{node.id}' has no value", node)
    if isinstance(node, Neg):
        return -closed(node.operand, env)
    if isinstance(node, Bin):
        a = closed(node.left, env)
        if node.op == "^":
            e = _int_value(node.right, env)
            if e.denominator != 1:
                raise EvalError("unsupported-expression", "fractional power", node)
            if e >= 0:
                return a ** int(e)
            return ONE / (a ** int(-e)) if not a.is_rational() else CE.const(a.as_rational() ** int(e))
        b = closed(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b.is_zero():
            raise EvalError("division-by-zero", "", node)
        if b.is_rational():
            return a * (RF(1) / b.as_rational())
        try:
            return a / b
        except ZeroDivisionError:
            raise EvalError("unsupported-expression", "division by a non-monomial", node) from None
    if isinstance(node, Call):
        return _closed_call(node, env)
    raise EvalError("not-closed-form", type(node).__name__, node)


def _closed_call(node: Call, env: dict) -> ConstantExpr:
    f, args = node.func, node.args
    if f == "fact":
        x = _int_value(args[0], env)
        if x.denominator != 1 or x < 0:
            raise EvalError("pole", f"fact({x})", node)
        return CE.const(factorial(int(x)))
    if f == "binomial":
        a, b = _int_value(args[0], env), _int_value(args[1], env)
        if b < 0 or a < 0 or b > a:
            return ZERO
        return CE.const(comb(int(a), int(b)))
    if f == "gamma":
        return _gamma_value(_int_value(args[0], env))
    if f == "psi":
        return _psi_value(_int_value(args[0], env))
    if f == "harmonic":
        x = _int_value(args[0], env)
        if x.denominator != 1 or x < 0:
            raise EvalError("unsupported-expression", f"harmonic({x})", node)
        return CE.const(harmonic(int(x)))
    if f in _ELEMENTARY:
        if node_rational(args[0]) == 0:
            return CE.const(0 if f in ("sin", "sinh") else 1)
        gen, _ = _ELEMENTARY[f]
        return dilate(gen, _dilation(args[0]))
    if f == "log":
        q = node_rational(args[0])
        if q is None or q <= 0:
            raise EvalError("not-closed-form", "log of a non-constant", node)
        num, den = q.numerator, q.denominator
        if num & (num - 1) or den & (den - 1):
            raise EvalError("unsupported-expression", f"log({q})", node)
        return LOG2 * (num.bit_length() - den.bit_length())
    if f == "sqrt":
        return _sqrt_value(args[0], env)
    if f in ("sphj", "sphy", "sphi"):
        m = _int_value(args[0], env)
        if m.denominator != 1:
            raise EvalError("unsupported-expression", "non-integer order", node)
        base = {"sphj": spherical_j, "sphy": spherical_y, "sphi": modified_spherical}[f](int(m))
        return dilate(base, _dilation(args[1]))
    if f == "legendre":
        m = _int_value(args[0], env)
        r = to_rf(args[1])
        if r is None or m.denominator != 1:
            raise EvalError("unsupported-expression", "legendre needs an integer degree", node)
        if not r.is_polynomial():
            raise EvalError("unsupported-expression", "legendre argument must be polynomial", node)
        return CE.const(legendre_poly(int(m), "x").compose({"x": r.num}))
    if f == "sum":
        idx = args[0].id
        lo, hi = _int_value(args[1], env), _int_value(args[2], env)
        total = ZERO
        for i in range(int(lo), int(hi) + 1):
            total = total + closed(args[3], {**env, idx: i})
        return total
    raise EvalError("not-closed-form", f"{f}(...) has no closed form here", node)


# ---------------------------------------------------------------------------
# index-linear families: spherical Bessel functions and Legendre polynomials

def _family_step(kind: str, m: RationalFunction, q: int, x: str):
    """(alpha, beta) with F(m+2) = alpha F(m) + beta F(m+1)."""
    zq = RF(var("z")) * q
    if kind in ("sphj", "sphy"):
        return RF(-1), (m * 2 + 3) / zq
    if kind == "sphi":
        return RF(1), -(m * 2 + 3) / zq
    if kind == "legendre":
        return -(m + 1) / (m + 2), (m * 2 + 3) * RF(var(x)) / (m + 2)
    raise EvalError("unsupported-expression", kind)


def _family_derivative(kind: str, m: RationalFunction, q: int):
    """Columns of D_z on (F(m), F(m+1)) for F = f(q z); None when z-free."""
    z = RF(var("z"))
    if kind in ("sphj", "sphy"):
        return [[m / z, RF(-q)], [RF(q), -(m + 2) / z]]
    if kind == "sphi":
        return [[m / z, RF(q)], [RF(q), -(m + 2) / z]]
    return None


@dataclass
class Family:
    """F(a*i + b) for one of the index-linear families, as a rank-2 module in i."""

    kind: str
    lin: Linear          # a*i + b (only a and c are used)
    q: int = 1           # argument multiple for Bessel kinds
    x: str = "z"         # argument variable for Legendre
    index: str = "n"

    def m_of(self) -> RationalFunction:
        return RF(var(self.index)) * self.lin.a + self.lin.c

    def shift_matrix(self) -> list:
        a = self.lin.a
        m = self.m_of()
        coords = [[RF(1), RF(0)], [RF(0), RF(1)]]
        if a < 0:
            # run the three-term relation downwards: F(m-1) = (F(m+1) - beta F(m)) / alpha
            for s in range(-a):
                al, be = _family_step(self.kind, m - s - 1, self.q, self.x)
                f0, f1 = coords[0], coords[1]
                coords.insert(0, [(f1[0] - be * f0[0]) / al, (f1[1] - be * f0[1]) / al])
            return [coords[0], coords[1]]
        for s in range(a):
            al, be = _family_step(self.kind, m + s, self.q, self.x)
            f0, f1 = coords[-2], coords[-1]
            coords.append([al * f0[0] + be * f1[0], al * f0[1] + be * f1[1]])
        return [coords[a], coords[a + 1]]

    def z_matrix(self):
        return _family_derivative(self.kind, self.m_of(), self.q)

    def value(self, i: int, offset: int = 0) -> ConstantExpr:
        m = self.lin.a * i + self.lin.c + offset
        if self.kind == "legendre":
            return CE.const(legendre_poly(m, "x").compose({"x": var(self.x)}))
        base = {"sphj": spherical_j, "sphy": spherical_y, "sphi": modified_spherical}[self.kind](m)
        return dilate(base, self.q)

    def values(self, i: int) -> list:
        return [self.value(i, 0), self.value(i, 1)]

    def recurrence(self) -> OreOperator:
        mod = FiniteModule(SHIFT, self.index, self.shift_matrix())
        return mod.annihilator(unit_vector(2, 0))


def family_of(node: Node, index: str) -> Family | None:
    if not isinstance(node, Call) or node.func not in ("sphj", "sphy", "sphi", "legendre"):
        return None
    lin = to_linear(node.args[0], index, index)
    if lin is None or lin.a == 0:
        return None
    lin = Linear(lin.a, 0, lin.c)
    if node.func == "legendre":
        r = to_rf(node.args[1])
        if r is None or len(r.variables()) != 1 or r != RF(var(next(iter(r.variables())))):
            raise EvalError("unsupported-expression", "legendre argument must be a variable", node)
        return Family("legendre", lin, 1, next(iter(r.variables())), index)
    return Family(node.func, lin, _dilation(node.args[1]), "z", index)


# ---------------------------------------------------------------------------
# sequences

@dataclass
class Seq:
    op: OreOperator
    term: Callable[[int], ConstantExpr]
    start: int = 0          # the recurrence holds for n >= start

    def terms(self, count: int) -> list:
        return [self.term(i) for i in range(count)]


def _first_order(r: RationalFunction, index: str) -> OreOperator:
    return primitive(OreOperator(SHIFT, index, [-r, RF(1)]))


def _factors(node: Node):
    """Flatten a product/quotient into (factor, +1 | -1) pairs."""
    if isinstance(node, Bin) and node.op == "*":
        return _factors(node.left) + _factors(node.right)
    if isinstance(node, Bin) and node.op == "/":
        return _factors(node.left) + [(f, -e) for f, e in _factors(node.right)]
    if isinstance(node, Neg):
        return [(Num(-1), 1)] + _factors(node.operand)
    return [(node, 1)]


def _falling_ratio(x: RationalFunction, steps: int) -> RationalFunction:
    out = RF(1)
    for i in range(steps):
        out = out * (x + i)
    return out


def hyper_ratio(node: Node, index: str) -> RationalFunction | None:
    """f(index+1)/f(index) for a hypergeometric factor, None if it is not one."""
    if index not in free_names(node):
        return RF(1)
    r = to_rf(node)
    if r is not None:
        return r.shift(index, 1) / r
    if isinstance(node, Call) and node.func in ("fact", "gamma"):
        arg = to_rf(node.args[0])
        if arg is None or not arg.is_polynomial() or poly_degree(arg.num, index) != 1:
            return None
        a = arg.diff(index)
        if not a.is_constant() or a.constant_value().denominator != 1 or a.constant_value() < 1:
            return None
        steps = int(a.constant_value())
        base = arg + 1 if node.func == "fact" else arg
        return _falling_ratio(base, steps)
    if isinstance(node, Call) and node.func == "binomial":
        top, bot = node.args
        parts = [(Call("fact", (top,)), 1), (Call("fact", (bot,)), -1), (Call("fact", (Bin("-", top, bot),)), -1)]
        out = RF(1)
        for f, e in parts:
            r = hyper_ratio(f, index)
            if r is None:
                return None
            out = out * r ** e if e > 0 else out / r
        return out
    if isinstance(node, Bin) and node.op == "^":
        if index in free_names(node.left):
            return None
        e = to_rf(node.right)
        if e is None or not e.is_polynomial() or poly_degree(e.num, index) != 1:
            return None
        step = e.diff(index)
        if not step.is_constant() or step.constant_value().denominator != 1:
            return None
        base = to_rf(node.left)
        if base is None:
            q = node_rational(node.left)
            if q is None:
                return None
            base = RF(q)
        return base ** int(step.constant_value())
    if isinstance(node, Neg):
        return hyper_ratio(node.operand, index)
    return None


def _difference_op(delta: RationalFunction, index: str) -> OreOperator:
    """Annihilator of f with f(n+1) - f(n) = delta(n)."""
    d1 = delta.shift(index, 1)
    return primitive(OreOperator(SHIFT, index, [d1, -(delta + d1), delta]))


def _leaf_sequence_op(node: Node, index: str) -> OreOperator | None:
    if isinstance(node, Call) and node.func in ("psi", "harmonic"):
        arg = to_rf(node.args[0])
        if arg is None or not arg.is_polynomial() or poly_degree(arg.num, index) != 1:
            return None
        a = arg.diff(index)
        if not a.is_constant() or a.constant_value().denominator != 1:
            return None
        steps = int(a.constant_value())
        if node.func == "psi":
            delta = sum((RF(1) / (arg + i) for i in range(steps)), RF(0))
        else:
            delta = sum((RF(1) / (arg + i) for i in range(1, steps + 1)), RF(0))
        return _difference_op(delta, index)
    fam = family_of(node, index)
    if fam is not None:
        return fam.recurrence()
    return None


_COMBINATORS = ("hadamard", "cauchy", "plus", "shift")


def sequence(node: Node, index: str) -> Seq:
    """P-recursive sequence n -> node(n)."""
    if isinstance(node, Call) and node.func == "hadamard":
        a, b = sequence(node.args[0], index), sequence(node.args[1], index)
        return Seq(re_hadamard(a.op, b.op), lambda i: a.term(i) * b.term(i), max(a.start, b.start))
    if isinstance(node, Call) and node.func == "cauchy":
        a, b = sequence(node.args[0], index), sequence(node.args[1], index)
        if a.start or b.start:
            raise EvalError("unsupported-expression", "cauchy product of a shifted sequence", node)

        def conv(i, a=a, b=b):
            total = ZERO
            for j in range(i + 1):
                total = total + a.term(j) * b.term(i - j)
            return total
        return Seq(re_cauchy(a.op, b.op), conv, 0)
    if isinstance(node, Call) and node.func == "plus":
        parts = [sequence(x, index) for x in node.args]
        op = parts[0].op
        for p in parts[1:]:
            op = re_plus(op, p.op)

        def total(i, parts=parts):
            acc = ZERO
            for p in parts:
                acc = acc + p.term(i)
            return acc
        return Seq(op, total, max(p.start for p in parts))
    if isinstance(node, Call) and node.func == "shift":
        s = node_rational(node.args[1])
        if s is None or s.denominator != 1:
            raise EvalError("unsupported-expression", "shift amount must be an integer", node)
        s = int(s)
        a = sequence(node.args[0], index)
        return Seq(re_shift(a.op, s), lambda i: a.term(i + s) if i + s >= 0 else ZERO, max(0, a.start - s))
    if isinstance(node, Neg) and isinstance(node.operand, Call) and node.operand.func in _COMBINATORS:
        a = sequence(node.operand, index)
        return Seq(a.op, lambda i: -a.term(i), a.start)
    if isinstance(node, Bin) and node.op in ("+", "-"):
        a, b = sequence(node.left, index), sequence(node.right, index)
        sign = 1 if node.op == "+" else -1
        return Seq(re_plus(a.op, b.op), lambda i: a.term(i) + b.term(i) * sign, max(a.start, b.start))
    # a product of hypergeometric factors, scalars and holonomic leaves
    ratio = RF(1)
    leaves = []
    for f, e in _factors(node):
        if isinstance(f, Bin) and f.op == "^" and _leaf_sequence_op(f.left, index) is not None:
            p = node_rational(f.right)
            if p is not None and p.denominator == 1 and p > 0 and e > 0:
                leaves += [_leaf_sequence_op(f.left, index)] * int(p)
                continue
        r = hyper_ratio(f, index)
        if r is not None:
            ratio = ratio * r if e > 0 else ratio / r
            continue
        op = _leaf_sequence_op(f, index) if e > 0 else None
        if op is None:
            if isinstance(f, Call) and f.func in ("hadamard", "cauchy", "plus", "shift") or isinstance(f, Bin):
                if e > 0:
                    leaves.append(sequence(f, index).op)
                    continue
            raise EvalError("not-holonomic", "cannot find a recurrence for this factor", f)
        leaves.append(op)
    op = _first_order(ratio, index)
    for L in leaves:
        op = re_hadamard(op, L)
    return Seq(op, lambda i: closed(node, {index: i}), 0)


# ---------------------------------------------------------------------------
# functions of one variable

@dataclass
class Fun:
    var: str
    series_fn: Callable[[int], SymbolicSeries]
    op_fn: Callable[[], OreOperator] | None = None
    free: bool = False           # does not depend on var
    notes: tuple = ()

    def series(self, top: int) -> SymbolicSeries:
        s = self.series_fn(top)
        if s.top < top:
            s = self.series_fn(top + 1)
        if s.top < top:
            raise EvalError("order-underflow", f"series known through {s.top}, need {top}")
        cut = s.alpha + int(top - s.alpha)
        return s.truncate(cut) if s.top > cut else s

    def annihilator(self) -> OreOperator:
        if self.op_fn is None:
            raise EvalError("no-annihilator", "no differential equation available for this expression")
        return self.op_fn()


def _rf_series(r: RationalFunction, v: str, top: int) -> SymbolicSeries:
    den = poly_coeff_in(r.den, v)
    if len(den) != 1:
        raise EvalError("unsupported-expansion", f"denominator {r.den} is not a monomial in {v}")
    (dexp, dcoef), = den.items()
    parts = poly_coeff_in(r.num, v)
    lo = min(parts) - dexp if parts else 0
    vals = [ZERO] * max(int(top - lo) + 1, 1)
    for e, c in parts.items():
        i = e - dexp - lo
        if i < len(vals):
            vals[i] = CE.const(RF(c) / RF(dcoef))
    return SymbolicSeries(v, lo, vals)


def annihilator_of_closed(e: ConstantExpr, v: str = "z", max_order: int = 12) -> OreOperator:
    """Minimal operator in D[v] for an element of the constant ring (functions of z)."""
    if e.is_zero():
        raise EvalError("no-annihilator", "zero function")
    derivs = [e]
    for _ in range(max_order):
        cur = derivs[-1]
        derivs.append(cur.diff_z() if v == "z" else cur.map_coeffs(lambda c: c.diff(v)))
    keys = []
    for d in derivs:
        for m in d.terms:
            if m not in keys:
                keys.append(m)
    vectors = [[d.terms.get(k, RF(0)) for k in keys] for d in derivs]
    found = first_dependency(iter(vectors), len(vectors))
    if found is None:
        raise EvalError("no-annihilator", "derivative space too large")
    _, c = found
    return primitive(OreOperator(DIFF, v, [-x for x in c] + [RF(1)]))


def _mul_series(fa: Fun, fb: Fun, top: int) -> SymbolicSeries:
    sa, sb = fa.series_fn(top), fb.series_fn(top)
    need_a = top - sb.alpha
    need_b = top - sa.alpha
    if sa.top < need_a:
        sa = fa.series_fn(int(-(-need_a // 1)) + 1)
    if sb.top < need_b:
        sb = fb.series_fn(int(-(-need_b // 1)) + 1)
    return sa * sb


def _monomial(s: SymbolicSeries):
    """(coefficient, exponent) if the series is one nonzero term."""
    nz = [(i, c) for i, c in enumerate(s.c0) if not c.is_zero()]
    if len(nz) != 1 or s.has_log():
        return None
    i, c = nz[0]
    return c, s.alpha + i


_ODE_OF = {"sin": [1, 0, 1], "cos": [1, 0, 1], "sinh": [-1, 0, 1], "cosh": [-1, 0, 1], "exp": [-1, 1]}


def function(node: Node, v: str) -> Fun:
    if v not in free_names(node):
        def const_series(top, node=node):
            return SymbolicSeries(v, 0, [closed(node)] + [ZERO] * max(top, 0))
        return Fun(v, const_series, lambda: OreOperator(DIFF, v, [0, 1]), True)
    if isinstance(node, Neg):
        f = function(node.operand, v)
        return Fun(v, lambda top: -f.series_fn(top), f.op_fn, f.free, f.notes)
    if isinstance(node, Bin) and node.op in ("+", "-"):
        a, b = function(node.left, v), function(node.right, v)
        sign = 1 if node.op == "+" else -1

        def add(top):
            return a.series_fn(top) + b.series_fn(top).scale(sign)
        op = (lambda: de_plus(a.annihilator(), b.annihilator())) if a.op_fn and b.op_fn else None
        return Fun(v, add, op, notes=a.notes + b.notes)
    if isinstance(node, Bin) and node.op == "*":
        a, b = function(node.left, v), function(node.right, v)

        def op():
            if a.free:
                return b.annihilator()
            if b.free:
                return a.annihilator()
            return de_product(a.annihilator(), b.annihilator())
        return Fun(v, lambda top: _mul_series(a, b, top), op if a.op_fn and b.op_fn else None,
                   notes=a.notes + b.notes)
    if isinstance(node, Bin) and node.op == "/":
        a, b = function(node.left, v), function(node.right, v)

        def div(top):
            sb = b.series_fn(top)
            mono = _monomial(sb)
            if mono is None:
                raise EvalError("unsupported-expression", "division by a series that is not a monomial", node)
            c, e = mono
            inv = ONE / c if not c.is_rational() else CE.const(RF(1) / c.as_rational())
            sa = a.series_fn(int(top + e) + 1)
            return sa.scale(inv).shift_exponent(-e)

        def op():
            if b.free:
                return a.annihilator()
            e = closed(node.right)
            return de_product(a.annihilator(), annihilator_of_closed(ONE / e if not e.is_rational()
                                                                     else CE.const(RF(1) / e.as_rational()), v))
        return Fun(v, div, op if a.op_fn else None, notes=a.notes + b.notes)
    if isinstance(node, Bin) and node.op == "^":
        p = node_rational(node.right)
        if p is not None and p.denominator == 1 and p > 0:
            base = function(node.left, v)
            acc = node.left
            for _ in range(int(p) - 1):
                acc = Bin("*", acc, node.left, node.loc)
            return function(acc, v) if p > 1 else base
    if isinstance(node, Call):
        return _function_call(node, v)
    # closed forms
    return _closed_function(node, v)


def _closed_function(node: Node, v: str) -> Fun:
    r = to_rf(node)
    if r is not None:
        return Fun(v, lambda top: _rf_series(r, v, top),
                   lambda: primitive(OreOperator(DIFF, v, [-r.diff(v), r])))
    if v != "z":
        raise EvalError("unsupported-expression", f"not a function of {v} that can be expanded", node)
    e = closed(node)
    return Fun(v, lambda top: expand_constexpr(e, "z", top), lambda: annihilator_of_closed(e, "z"))


def _integral_annihilator(name: str, m: int) -> OreOperator:
    """The derivative of each integral function is elementary over z: F' = g(m z)/z."""
    inner = {"si": [m * m, 0, 1], "ci": [m * m, 0, 1], "ei": [-m, 1], "e1": [m, 1]}[name]
    return primitive(mul(OreOperator(DIFF, "z", inner), OreOperator(DIFF, "z", [0, var("z")])))


def _bessel_j(node: Call, v: str) -> Fun:
    """J_nu(lambda z) for an integer nu >= 0 and lambda^2 rational."""
    nu = node_rational(node.args[0])
    if nu is None or nu.denominator != 1 or nu < 0:
        raise EvalError("unsupported-expansion", "besselj needs a nonnegative integer order", node)
    nu = int(nu)
    lam2 = None
    for fac, e in _factors(node.args[1]):
        if isinstance(fac, Call) and fac.func == "sqrt" and e == 1 and lam2 is None:
            lam2 = to_rf(fac.args[0])
        elif to_rf(fac) == RF(var(v)) and e == 1:
            continue
        else:
            r = to_rf(fac)
            if r is None or v in r.variables():
                raise EvalError("unsupported-expansion", "besselj argument must be z*sqrt(r)", node)
            lam2 = (lam2 if lam2 is not None else RF(1)) * (r * r if e > 0 else RF(1) / (r * r))
    lam2 = lam2 if lam2 is not None else RF(1)
    if nu % 2:
        raise EvalError("unsupported-expansion", "odd order needs a rational argument multiple", node)

    def ser(top):
        vals = [ZERO] * (top - nu + 1) if top >= nu else [ZERO]
        m = 0
        while 2 * m + nu <= top:
            c = RF(Fraction((-1) ** m, 4 ** m * 2 ** nu * factorial(m) * factorial(m + nu))) * lam2 ** (m + nu // 2)
            vals[2 * m] = CE.const(c)
            m += 1
        return SymbolicSeries(v, nu, vals)
    z = RF(var(v))
    return Fun(v, ser, lambda: primitive(OreOperator(DIFF, v, [lam2 * z * z - nu * nu, z, z * z])))


def _catalog_series(name: str, m: int):
    return {"si": si_series, "ci": ci_series, "ei": ei_series, "e1": e1_series}[name]


def _function_call(node: Call, v: str) -> Fun:
    f, args = node.func, node.args
    if f in ("si", "ci", "ei", "e1"):
        if v != "z":
            raise EvalError("unsupported-expansion", f"{f} in {v}", node)
        m = _dilation(args[0])
        fn = _catalog_series(f, m)
        return Fun(v, lambda top: fn(m, top), lambda: _integral_annihilator(f, m))
    if f == "log":
        if to_rf(args[0]) != RF(var(v)):
            raise EvalError("unsupported-expansion", "log of anything but the variable", node)
        return Fun(v, lambda top: SymbolicSeries(v, 0, [ZERO] * (top + 1), [ONE] + [ZERO] * top),
                   lambda: OreOperator(DIFF, v, [0, 1, var(v)]))
    if f == "besselj":
        return _bessel_j(node, v)
    if f in ("djnu", "dynu", "dinu", "dknu"):
        if v != "z" or to_rf(args[1]) != RF(var("z")):
            raise EvalError("unsupported-expansion", f"{f} needs argument z", node)
        nu = node_rational(args[0])
        if nu is None:
            raise EvalError("unsupported-expansion", "order must be a number", node)
        return Fun(v, lambda top: _order_derivative_series(f, nu, top, node))
    if f == "sqrt":
        return _sqrt_function(node, v)
    if f == "compose_alg":
        return _compose_alg(node, v)
    if f == "gf":
        return _generating_function(node, v)
    if f in _ODE_OF and v == "z":
        e = closed(node)
        return Fun(v, lambda top: expand_constexpr(e, "z", top), lambda: annihilator_of_closed(e, "z"))
    return _closed_function(node, v)


def _order_derivative_series(f: str, nu: Fraction, top: int, node: Node) -> SymbolicSeries:
    try:
        if f == "djnu" and nu.denominator == 1:
            return djnu_series(int(nu), top)
        if f == "dynu" and nu.denominator == 1:
            return dynu_series(int(nu), top)
        if f == "dinu" and nu.denominator == 2:
            return bessel_i_dnu_series(nu, top)
        if f == "dknu" and abs(nu) == Fraction(1, 2):
            # K = (pi/2)(I_-nu - I_nu)/sin(nu pi); at nu = +-1/2 the cosine term drops out
            both = bessel_i_dnu_series(Fraction(1, 2), top + 1) + bessel_i_dnu_series(Fraction(-1, 2), top + 1)
            sign = -1 if nu > 0 else 1
            return both.scale(PI * RF(Fraction(sign, 2)))
    except SeriesError as exc:
        raise EvalError(exc.code, str(exc), node) from None
    raise EvalError("unsupported-expansion", f"{f} at order {nu}", node)


def _sqrt_function(node: Call, v: str) -> Fun:
    """sqrt of c * pi^a * v^b with b odd or even."""
    arg = node.args[0]
    power = Fraction(0)
    rest = []
    for fac, e in _factors(arg):
        r = to_rf(fac)
        if r is not None and v in r.variables():
            q = r / RF(var(v)) ** poly_degree(r.num, v)
            if not r.is_polynomial() or not q.is_constant():
                raise EvalError("unsupported-expression", "sqrt of a non-monomial", node)
            power += Fraction(poly_degree(r.num, v) * e, 2)
            rest.append((Num(int(q.constant_value())) if q.constant_value().denominator == 1
                         else Bin("/", Num(q.constant_value().numerator), Num(q.constant_value().denominator)), e))
        else:
            rest.append((fac, e))
    expr = None
    for fac, e in rest:
        piece = fac if e > 0 else Bin("/", Num(1), fac)
        expr = piece if expr is None else Bin("*", expr, piece)
    c = _sqrt_value(expr, {}) if expr is not None else ONE

    def ser(top):
        n = int(top - power)
        return SymbolicSeries(v, power, [c] + [ZERO] * max(n, 0))
    return Fun(v, ser)


def _ore_from_node(node: Node) -> OreOperator:
    """An operator expression sum_i c_i * D[g]^i."""
    terms = {}
    kind = gvar = None

    def walk(nd, sign):
        nonlocal kind, gvar
        if isinstance(nd, Bin) and nd.op in ("+", "-"):
            walk(nd.left, sign)
            walk(nd.right, sign if nd.op == "+" else -sign)
            return
        if isinstance(nd, Neg):
            walk(nd.operand, -sign)
            return
        coeff = RF(sign)
        power = 0
        for fac, e in _factors(nd):
            base, p = fac, 1
            if isinstance(fac, Bin) and fac.op == "^" and isinstance(fac.left, OpSym):
                base, p = fac.left, int(node_rational(fac.right))
            if isinstance(base, OpSym):
                if e < 0:
                    raise EvalError("syntax-error", "operator in a denominator", fac)
                kind = base.kind
                gvar = base.var
                power += p
                continue
            r = to_rf(fac)
            if r is None:
                raise EvalError("unsupported-expression", "operator coefficients must be rational", fac)
            coeff = coeff * r if e > 0 else coeff / r
        terms[power] = terms.get(power, RF(0)) + coeff

    walk(node, 1)
    if kind is None:
        raise EvalError("syntax-error", "expected an operator in D[...] or S[...]", node)
    top = max(terms)
    return OreOperator(DIFF if kind == "D" else SHIFT, gvar, [terms.get(i, RF(0)) for i in range(top + 1)])


def _principal_root(P: RationalFunction, v: str, gvar: str) -> tuple[RationalFunction, str]:
    p0 = P.subs({v: 0}).num
    _, facs = p0.factor()
    roots = []
    for fac, _ in facs:
        parts = poly_coeff_in(fac, gvar)
        if max(parts) == 1:
            root = -RF(parts.get(0, fac * 0)) / RF(parts[1])
            roots.append(root)
    if not roots:
        raise EvalError("unsupported-expression", "no rational branch at the expansion point")

    def positive(r):
        lc = r.num.leading_coefficient()
        return to_fraction(lc) * to_fraction(r.den.leading_coefficient()) > 0
    roots.sort(key=lambda r: (not positive(r), str(r)))
    chosen = roots[0]
    note = f"branch {gvar}(0) = {chosen}" + (" (principal square root)" if len(roots) > 1 else "")
    return chosen, note


def _root_series(P: RationalFunction, v: str, gvar: str, g0: RationalFunction, top: int) -> list:
    """Power series coefficients of the branch g(v) of P(v, g) = 0 through v^top."""
    pj = {j: RF(c) / RF(P.den) for j, c in poly_coeff_in(P.num, gvar).items()}

    def at(g):
        return sum((c * g ** j for j, c in pj.items()), RF(0))

    d0 = sum((c * g0 ** (j - 1) * j for j, c in pj.items() if j), RF(0)).subs({v: 0})
    if d0.is_zero():
        raise EvalError("unsupported-expression", "branch point at the expansion point")
    coeffs = [g0]
    vv = RF(var(v))
    # undetermined coefficients on P(v, g0 + a1 v + ... + ai v^i) = O(v^(i+1))
    for i in range(1, top + 1):
        val = at(sum((c * vv ** j for j, c in enumerate(coeffs)), RF(0)))
        if v in poly_variables(val.den):
            raise EvalError("unsupported-expression", "branch coefficients depend on the variable")
        ci = RF(poly_coeff_in(val.num, v).get(i, val.num * 0)) / RF(val.den)
        coeffs.append(-ci / d0)
    return coeffs


def image_annihilator(P: OreOperator, Q: OreOperator) -> OreOperator | None:
    """Annihilator of P f for every f with Q f = 0; None when P f vanishes."""
    mod = companion(Q)
    vec = [RF(0)] * mod.dim
    cur = unit_vector(mod.dim, 0)
    for i, c in enumerate(P.coeffs):
        if i:
            cur = mod.act(cur)
        if not c.is_zero():
            vec = [x + c * y for x, y in zip(vec, cur)]
    if all(x.is_zero() for x in vec):
        return None
    return mod.annihilator(vec)


def _compose_alg(node: Call, v: str) -> Fun:
    L = _ore_from_node(node.args[0])
    P = to_rf(node.args[1])
    if P is None:
        raise EvalError("unsupported-expression", "algebraic relation must be polynomial", node.args[1])
    gvar = L.var
    outer = node.args[2]
    if not isinstance(outer, Call) or outer.func not in _ODE_OF or to_rf(outer.args[0]) != RF(var(gvar)):
        raise EvalError("unsupported-expression", "outer function must be sin, cos, sinh, cosh or exp", outer)
    g0, note = _principal_root(P, v, gvar)
    if v not in P.variables():
        raise EvalError("unsupported-expression", "relation does not involve the variable", node)

    def ser(top):
        coeffs = _root_series(P, v, gvar, g0, top)
        w = SymbolicSeries(v, 0, [ZERO] + [CE.const(c) for c in coeffs[1:]])
        # f(g0 + w) = sum_m f^(m)(g0) w^m / m!
        dil = g0 / RF(var("z"))
        if not dil.is_constant() or dil.constant_value().denominator != 1:
            raise EvalError("unsupported-expression", "branch value must be an integer multiple of z")
        q = int(dil.constant_value())
        gen = dilate(_ELEMENTARY[outer.func][0], q)
        derivs = [gen]
        total = SymbolicSeries(v, 0, [gen] + [ZERO] * top)
        wp = SymbolicSeries(v, 0, [ONE] + [ZERO] * top)
        for m in range(1, top + 1):
            derivs.append(derivs[-1].diff_z() * RF(Fraction(1, q)))
            wp = wp * w
            total = total + wp.scale(derivs[m] * RF(Fraction(1, factorial(m))))
        return total

    def op():
        return algebraic_compose(L, P, outer=v, gvar=gvar)
    return Fun(v, ser, op, notes=(note,))


def _generating_function(node: Call, v: str) -> Fun:
    idx = node.args[0].id
    tv = to_rf(node.args[1])
    if tv != RF(var(v)):
        raise EvalError("unsupported-expression", "generating function variable must match", node)
    seq = sequence(node.args[2], idx)

    def ser(top):
        return SymbolicSeries(v, 0, [seq.term(i) for i in range(top + 1)])
    return Fun(v, ser, lambda: re2de(seq.op, v, start=seq.start))

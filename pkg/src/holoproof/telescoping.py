"""Gosper, Zeilberger and creative telescoping for sums of h(n,k) f(k).

Everything is expressed relative to the hypergeometric factor: a summand
h(n,k) f(n,z,k) is the coordinate vector e_0 in the basis e_j = f(k+j), and a
certificate G = h(n,k) * sum_j g_j(n,k) e_j is stored as the list g.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable

from .arith import (CTX, RF, VARIABLES, RationalFunction, poly_coeff_in, poly_content_rational,
                    poly_degree, to_fraction, var)
from .constants import CE, ZERO
from .hyper import HyperError, HyperProduct, HyperTerm
from .linalg import nullspace
from .ore import DIFF, SHIFT, OreOperator, companion, render, render_coeff
from .relations import InhomogeneousRelation

RECURRENCE = "recurrence"
DIFFERENTIAL = "differential"


class TelescopingError(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


# ---------------------------------------------------------------------------
# polynomial helpers in the summation variable

def _poly_lcm(a, b):
    if a.is_one():
        return b
    if b.is_one():
        return a
    return a * (b / a.gcd(b))


def _monic_k_part(p, kv):
    """The factor of p that actually depends on kv, with positive leading coefficient."""
    if p.is_constant():
        return CTX.constant(1)
    c, facs = p.factor()
    out = CTX.constant(1)
    for f, e in facs:
        if poly_degree(f, kv) > 0:
            out = out * f ** int(e)
    if to_fraction(out.leading_coefficient()) < 0:
        out = -out
    return out


def _k_shift_between(p, q, kv):
    """Integer h with q(k+h) proportional to p(k), or None (p, q irreducible)."""
    dp, dq = poly_degree(p, kv), poly_degree(q, kv)
    if dp != dq or dp <= 0:
        return None
    pc = poly_coeff_in(p, kv)
    qc = poly_coeff_in(q, kv)
    lp, lq = RF(pc[dp]), RF(qc[dq])
    ap = RF(pc.get(dp - 1, CTX.constant(0))) / lp
    aq = RF(qc.get(dq - 1, CTX.constant(0))) / lq
    hh = (ap - aq) / dp
    if not hh.is_constant():
        return None
    h = hh.constant_value()
    if h.denominator != 1:
        return None
    h = int(h)
    shifted = RF(q).shift(kv, h)
    if shifted * lp == RF(p) * lq:
        return h
    return None


def gosper_petkovsek(r: RationalFunction, kv: str = "k"):
    """Write r = A(k)/B(k) * C(k+1)/C(k) with gcd(A(k), B(k+h)) = 1 for all h >= 0."""
    A, B = r.num, r.den
    C = CTX.constant(1)
    while True:
        afacs = [f for f, _ in A.factor()[1] if poly_degree(f, kv) > 0]
        bfacs = [f for f, _ in B.factor()[1] if poly_degree(f, kv) > 0]
        shifts = [h for pa in afacs for qb in bfacs
                  for h in [_k_shift_between(pa, qb, kv)] if h is not None and h >= 0]
        if not shifts:
            break
        h = min(shifts)
        s = A.gcd(RF(B).shift(kv, h).num)
        if s.is_constant():
            break
        A = A / s
        B = B / RF(s).shift(kv, -h).num
        for i in range(1, h + 1):
            C = C * RF(s).shift(kv, -i).num
    return A, B, C


# ---------------------------------------------------------------------------
# summand systems

@dataclass
class SummandSystem:
    """Summand h(n,k) f(k) with f described by a finite module.

    ``kmat[j]`` is the coordinate vector of f(k+1+j) shifted basis, i.e. the
    image of e_j under k -> k+1; ``nmat`` (recurrence mode, default identity)
    gives the images under n -> n+1; ``zmat`` (differential mode) the
    derivatives D_z e_j.
    """

    h: HyperTerm
    kmat: list
    mode: str = RECURRENCE
    nmat: list | None = None
    zmat: list | None = None
    zvar: str = "z"
    labels: list = field(default_factory=list)
    basis_values: Callable[[int], list] | None = None

    @property
    def d(self) -> int:
        return len(self.kmat)

    @property
    def kv(self) -> str:
        return self.h.kvar

    @property
    def nv(self) -> str:
        return self.h.nvar

    @property
    def param_var(self) -> str:
        return self.nv if self.mode == RECURRENCE else self.zvar

    # actions on coordinate vectors --------------------------------------
    def act_k(self, v):
        out = [RF(0)] * self.d
        for j, c in enumerate(v):
            if c.is_zero():
                continue
            cs = c.shift(self.kv, 1)
            for i, m in enumerate(self.kmat[j]):
                if not m.is_zero():
                    out[i] = out[i] + cs * m
        return out

    def act_n(self, v):
        out = [RF(0)] * self.d
        for j, c in enumerate(v):
            if c.is_zero():
                continue
            cs = c.shift(self.nv, 1)
            if self.nmat is None:
                out[j] = out[j] + cs
                continue
            for i, m in enumerate(self.nmat[j]):
                if not m.is_zero():
                    out[i] = out[i] + cs * m
        return out

    def act_z(self, v):
        out = [RF(0)] * self.d
        for j, c in enumerate(v):
            if c.is_zero():
                continue
            dc = c.diff(self.zvar)
            if not dc.is_zero():
                out[j] = out[j] + dc
            for i, m in enumerate(self.zmat[j]):
                if not m.is_zero():
                    out[i] = out[i] + c * m
        return out

    def shifted_basis_vector(self, m: int):
        """Coordinates of f(k+m) in the basis e_0..e_{d-1}."""
        v = [RF(0)] * self.d
        if m < self.d:
            v[m] = RF(1)
            return v
        v[self.d - 1] = RF(1)
        for _ in range(m - self.d + 1):
            v = self.act_k(v)
        return v

    def telescoper_images(self, order: int):
        """w_0..w_order with F(n+i,k) (or D_z^i F) = h(n,k) <w_i, e>."""
        w = [RF(0)] * self.d
        w[0] = RF(1)
        out = [w]
        if self.mode == RECURRENCE:
            rn = self.h.ratio_n
            for _ in range(order):
                w = [rn * x for x in self.act_n(w)]
                out.append(w)
        else:
            ld = self.h.product.log_derivative(self.zvar) if self.h.product is not None else RF(0)
            for _ in range(order):
                dz = self.act_z(w)
                w = [ld * x + y for x, y in zip(w, dz)]
                out.append(w)
        return out

    def delta_k(self, g):
        """Coordinates of G(k+1) - G(k) relative to h(n,k)."""
        rk = self.h.ratio_k
        return [rk * x - y for x, y in zip(self.act_k(g), g)]

    @classmethod
    def from_recurrences(cls, h: HyperTerm, recK: OreOperator, recN=None, recZ=None,
                         zvar: str = "z", labels=None, basis_values=None) -> "SummandSystem":
        if recK.kind != SHIFT or recK.var != h.kvar:
            raise TelescopingError("bad-system", "recK must be a shift in the summation variable")
        kmat = companion(recK).matrix
        sys = cls(h, kmat, RECURRENCE if recZ is None else DIFFERENTIAL, zvar=zvar,
                  labels=labels or [f"f({h.kvar}+{j})" if j else f"f({h.kvar})" for j in range(recK.order)],
                  basis_values=basis_values)
        betas = recN if recN is not None else recZ
        if betas is not None:
            betas = [b if isinstance(b, RationalFunction) else RF.parse(b) if isinstance(b, str) else RF(b)
                     for b in betas]
            mat = []
            for j in range(sys.d):
                col = [RF(0)] * sys.d
                for i, b in enumerate(betas):
                    bj = b.shift(h.kvar, j)
                    for q, x in enumerate(sys.shifted_basis_vector(j + i)):
                        if not x.is_zero():
                            col[q] = col[q] + bj * x
                mat.append(col)
            if recZ is not None:
                sys.zmat = mat
            else:
                sys.nmat = mat
        elif recZ is None and recN is None:
            sys.nmat = None
        return sys


# ---------------------------------------------------------------------------
# certificates

@dataclass
class TelescopingCertificate:
    telescoper: list            # c_0..c_rho (rational in the parameters)
    certificate: list           # g_0..g_{d-1} relative to h(n,k)
    mode: str = RECURRENCE
    param_var: str = "n"
    rhs: object = None

    def operator(self) -> OreOperator:
        kind = SHIFT if self.mode == RECURRENCE else DIFF
        return OreOperator(kind, self.param_var, self.telescoper)

    def render(self) -> str:
        gs = ", ".join(render_coeff(g) for g in self.certificate)
        rhs = "0" if self.rhs is None else str(self.rhs)
        return f"telescoper: {render(self.operator())}; certificate: [{gs}]; rhs: {rhs}"

    def __str__(self):
        return self.render()


def verify_certificate(cert: TelescopingCertificate, sys: SummandSystem) -> bool:
    """Check sum_i c_i w_i = Delta_k G identically (pure rational-function arithmetic)."""
    if len(cert.certificate) != sys.d:
        return False
    ws = sys.telescoper_images(len(cert.telescoper) - 1)
    lhs = [RF(0)] * sys.d
    for c, w in zip(cert.telescoper, ws):
        c = c if isinstance(c, RationalFunction) else RF(c)
        lhs = [x + c * y for x, y in zip(lhs, w)]
    rhs = sys.delta_k([g if isinstance(g, RationalFunction) else RF(g) for g in cert.certificate])
    return all((x - y).is_zero() for x, y in zip(lhs, rhs))


# ---------------------------------------------------------------------------
# the ansatz solver

def _columns_to_rows(columns, kv):
    """Turn column vectors of rational functions into a polynomial coefficient matrix."""
    d = len(columns[0])
    rows = []
    for comp in range(d):
        den = CTX.constant(1)
        for col in columns:
            den = _poly_lcm(den, col[comp].den)
        polys = []
        for col in columns:
            x = col[comp]
            polys.append(x.num * (den / x.den) if not x.is_zero() else CTX.constant(0))
        by_power: dict[int, list] = {}
        for j, p in enumerate(polys):
            for e, part in poly_coeff_in(p, kv).items():
                by_power.setdefault(e, [CTX.constant(0)] * len(columns))[j] = part
        for e in sorted(by_power):
            rows.append(by_power[e])
    return rows


def _numeric_rank_test(rows, ncols, params, rng):
    """Nullspace dimension at a random parameter point (Fractions)."""
    point = {p: rng.randint(7, 97) for p in params}
    mat = []
    for r in rows:
        mat.append([to_fraction(x.subs(point).leading_coefficient()) if not x.is_zero() and not x.subs(point).is_zero() else Fraction(0)
                    for x in r])
    return _fraction_nullspace(mat, ncols)


def _fraction_nullspace(mat, ncols):
    m = [list(r) for r in mat]
    pivots = []
    top = 0
    for col in range(ncols):
        piv = next((i for i in range(top, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[top], m[piv] = m[piv], m[top]
        inv = 1 / m[top][col]
        m[top] = [x * inv for x in m[top]]
        for i in range(len(m)):
            if i != top and m[i][col] != 0:
                f = m[i][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[top])]
        pivots.append(col)
        top += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * ncols
        x[fc] = Fraction(1)
        for r, pc in zip(m, pivots):
            x[pc] = -r[fc]
        basis.append(x)
    return basis


def _solve_ansatz(sys: SummandSystem, order: int, den, mult, deg: int, ws=None):
    """Search c_0..c_order and g_j = mult * X_j(k) / den with deg X_j <= deg."""
    kv = sys.kv
    if ws is None:
        ws = sys.telescoper_images(order)
    columns = []
    for i in range(order + 1):
        columns.append([-x for x in ws[i]])
    kpow = RF(1)
    base = RF(mult) / RF(den)
    xcols = []
    for l in range(deg + 1):
        for j in range(sys.d):
            g = [RF(0)] * sys.d
            g[j] = base * kpow
            xcols.append(sys.delta_k(g))
        kpow = kpow * RF(var(kv))
    columns += xcols
    rows = _columns_to_rows(columns, kv)
    ncols = len(columns)
    params = sorted(set().union(*[set(_vars_of(r)) for r in rows]) - {kv})
    rng = random.Random(1234 + order * 31 + deg)
    numeric = _numeric_rank_test(rows, ncols, params, rng)
    if not any(any(v[i] != 0 for i in range(order + 1)) for v in numeric):
        return None
    sym_rows = [[RF(x) for x in r] for r in rows]
    basis = nullspace(sym_rows, ncols)
    for vec in basis:
        cs = vec[: order + 1]
        if any(not c.is_zero() for c in cs):
            xs = vec[order + 1:]
            g = [RF(0)] * sys.d
            kpow = RF(1)
            idx = 0
            for l in range(deg + 1):
                for j in range(sys.d):
                    if not xs[idx].is_zero():
                        g[j] = g[j] + xs[idx] * kpow
                    idx += 1
                kpow = kpow * RF(var(kv))
            g = [x * base for x in g]
            return cs, g
    return None


def _vars_of(row):
    out = set()
    for x in row:
        if not x.is_zero():
            out |= {n for n, dg in zip(VARIABLES, x.degrees()) if dg > 0}
    return out


def _normalize_solution(cs, g, sys: SummandSystem):
    """Scale so the telescoper has primitive polynomial coefficients."""
    nz = [c for c in cs if not c.is_zero()]
    den = reduce(_poly_lcm, (c.den for c in nz), CTX.constant(1))
    polys = [(c * RF(den)).num for c in nz]
    gcd = reduce(lambda a, b: a.gcd(b), polys)
    prim = [RF(p) / RF(gcd) for p in polys]
    cont = reduce(_frac_gcd, (poly_content_rational(p.num) for p in prim))
    sign = -1 if to_fraction(prim[-1].num.leading_coefficient()) < 0 else 1
    total = RF(den) / RF(gcd) / RF(cont) * sign
    return [c * total for c in cs], [x * total for x in g]


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    from math import gcd, lcm
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def _denominator_candidates(sys: SummandSystem, ws):
    kv = sys.kv
    Q = CTX.constant(1)
    for w in ws:
        for x in w:
            if not x.is_zero():
                Q = _poly_lcm(Q, _monic_k_part(x.den, kv))
    rtil = sys.h.ratio_k * RF(Q) / RF(Q).shift(kv, 1)
    A, B, C = gosper_petkovsek(rtil, kv)
    lead = CTX.constant(1)
    for col in sys.kmat:
        for x in col:
            if not x.is_zero():
                lead = _poly_lcm(lead, _monic_k_part(x.den, kv))
    lead_prev = RF(lead).shift(kv, -1).num
    return Q, A, B, C, lead, lead_prev


def ct_holonomic(sys: SummandSystem, mode: str | None = None, max_order: int = 4,
                 max_degree: int = 8, min_order: int = 1) -> TelescopingCertificate:
    """Creative telescoping by iterative deepening on (order, certificate degree)."""
    if mode is not None and mode != sys.mode:
        raise TelescopingError("bad-system", f"system is in {sys.mode} mode")
    for order in range(min_order, max_order + 1):
        ws = sys.telescoper_images(order)
        Q, A, B, C, lead, lead_prev = _denominator_candidates(sys, ws)
        den = _poly_lcm(C * Q, lead * lead_prev)
        mult = CTX.constant(1)
        deg = 0
        while deg <= max_degree:
            sol = _solve_ansatz(sys, order, den, mult, deg, ws)
            if sol is not None:
                cs, g = _normalize_solution(*sol, sys)
                cert = TelescopingCertificate(cs, g, sys.mode, sys.param_var)
                if not verify_certificate(cert, sys):
                    raise TelescopingError("self-check", "certificate failed verification")
                return cert
            deg = deg + 1 if deg < 4 else deg * 2
    raise TelescopingError("order-exhausted", f"no telescoper up to order {max_order}")


# ---------------------------------------------------------------------------
# Gosper and Zeilberger

def _gosper_degree_bound(A, B, rhs_deg, kv):
    """Degree bound for X in A(k) X(k+1) - B(k-1) X(k) = rhs."""
    Bm = RF(B).shift(kv, -1).num
    da, db = poly_degree(A, kv), poly_degree(Bm, kv)
    ca, cb = poly_coeff_in(A, kv), poly_coeff_in(Bm, kv)
    if da != db or RF(ca[da]) != RF(cb[db]):
        return rhs_deg - max(da, db)
    m = da
    lc = RF(ca[m])
    a1 = RF(ca.get(m - 1, CTX.constant(0)))
    b1 = RF(cb.get(m - 1, CTX.constant(0)))
    cand = [rhs_deg - m + 1]
    q = (b1 - a1) / lc
    if q.is_constant():
        v = q.constant_value()
        if v.denominator == 1 and v >= 0:
            cand.append(int(v))
    return max(cand)


def gosper(ratio_k: RationalFunction, kv: str = "k"):
    """Rational R with g(k) = R(k) h(k) an antidifference of h, or None."""
    if ratio_k.is_zero():
        raise TelescopingError("bad-term", "ratio must be nonzero")
    A, B, C = gosper_petkovsek(ratio_k, kv)
    deg = _gosper_degree_bound(A, B, poly_degree(C, kv), kv)
    if deg < 0:
        return None
    Bm = RF(B).shift(kv, -1)
    unknowns = deg + 1
    cols = []
    k = RF(var(kv))
    for l in range(unknowns):
        x = k ** l
        cols.append([RF(A) * x.shift(kv, 1) - Bm * x])
    cols.append([-RF(C)])
    rows = _columns_to_rows(cols, kv)
    basis = nullspace([[RF(x) for x in r] for r in rows], unknowns + 1)
    for vec in basis:
        if not vec[-1].is_zero():
            X = sum((vec[l] / vec[-1] * k ** l for l in range(unknowns)), RF(0))
            R = Bm * X / RF(C)
            # g(k+1) - g(k) = h(k):  R(k+1) r(k) - R(k) = 1
            if (R.shift(kv, 1) * ratio_k - R - 1).is_zero():
                return R
    return None


def zeilberger_system(h: HyperTerm) -> SummandSystem:
    return SummandSystem(h, [[RF(1)]], RECURRENCE, labels=["1"],
                         basis_values=lambda k: [CE.const(1)])


def _zeilberger_cert(sys: SummandSystem, order: int):
    kv = sys.kv
    ws = sys.telescoper_images(order)
    Q = CTX.constant(1)
    for w in ws:
        Q = _poly_lcm(Q, _monic_k_part(w[0].den, kv))
    P = [w[0] * RF(Q) for w in ws]
    rtil = sys.h.ratio_k * RF(Q) / RF(Q).shift(kv, 1)
    A, B, C = gosper_petkovsek(rtil, kv)
    dp = max(poly_degree(p.num, kv) for p in P if not p.is_zero())
    deg = _gosper_degree_bound(A, B, poly_degree(C, kv) + dp, kv)
    if deg < 0:
        return None
    mult = RF(B).shift(kv, -1).num
    return _solve_ansatz(sys, order, C * Q, mult, deg, ws)


def zeilberger(h: HyperTerm, lower: int = 0, upper=("affine", 1, 0), max_order: int = 4):
    """Recurrence for S(n) = sum_{k=lower}^{upper} h(n,k); upper is ("affine", u, v)
    for u*n+v or "inf" for natural boundaries."""
    sys = zeilberger_system(h)
    for order in range(1, max_order + 1):
        sol = _zeilberger_cert(sys, order)
        if sol is None:
            continue
        cs, g = _normalize_solution(*sol, sys)
        cert = TelescopingCertificate(cs, g, RECURRENCE, sys.param_var)
        if not verify_certificate(cert, sys):
            raise TelescopingError("self-check", "certificate failed verification")
        rel = sum_with_boundaries(cert, sys, lower, upper)
        cert.rhs = rel.rhs
        return rel, cert
    raise TelescopingError("order-exhausted", f"no telescoper up to order {max_order}")


# ---------------------------------------------------------------------------
# summing the telescoping relation

@dataclass
class BoundaryResult:
    relation: InhomogeneousRelation
    assumptions: list
    upper_vector: list | None = None


def _eval_vector_at(vec, kv, value):
    return [x.compose({kv: value}) if not x.is_zero() else x for x in vec]


def sum_with_boundaries(cert: TelescopingCertificate, sys: SummandSystem, lower: int,
                        upper, initial_f=None, assumptions: list | None = None) -> InhomogeneousRelation:
    """Sum the certificate relation over k = lower..upper.

    ``upper`` is ("affine", u, v) for u*n + v (recurrence mode), "inf" (the caller
    asserts that the boundary term at infinity vanishes; recorded in
    ``assumptions``) or ("symbolic", name) for a truncated sum whose upper
    boundary term is kept as text.
    """
    kv = sys.kv
    op = cert.operator()
    if initial_f is None and sys.basis_values is not None:
        initial_f = sys.basis_values(lower)
    if initial_f is None or len(initial_f) < sys.d:
        raise TelescopingError("insufficient-initials", f"need f({lower})..f({lower + sys.d - 1})")
    g = [x if isinstance(x, RationalFunction) else RF(x) for x in cert.certificate]
    if all(x.is_zero() for x in g) and all(c.is_zero() for c in cert.telescoper):
        return InhomogeneousRelation(op, ZERO)
    rhs = ZERO
    notes = assumptions if assumptions is not None else []

    # lower boundary: -G(n, lower)
    g_low = _eval_vector_at(g, kv, lower)
    bracket = ZERO
    for gl, fv in zip(g_low, initial_f):
        if not gl.is_zero():
            bracket = bracket + CE.coerce(fv) * gl
    if not bracket.is_zero():
        hl = _hyper_at_k(sys, lower)
        if hl is None:
            raise TelescopingError("non-rational-boundary",
                                   f"lower boundary term h(n,{lower})*({bracket}) is not rational")
        rhs = rhs - bracket * hl

    if upper == "inf":
        notes.append("boundary term G(k) vanishes as k -> infinity")
    elif isinstance(upper, tuple) and upper[0] == "symbolic":
        notes.append(f"upper boundary term G({upper[1]}+1) kept symbolic")
    elif isinstance(upper, tuple) and upper[0] == "affine":
        if sys.mode != RECURRENCE:
            raise TelescopingError("bad-bounds", "affine upper bound needs recurrence mode")
        _, u, v = upper
        vec = _upper_boundary_vector(cert, sys, g, u, v)
        if any(not x.is_zero() for x in vec):
            if sys.d != 1:
                raise TelescopingError("non-homogeneous-boundary", "upper boundary does not cancel")
            hU = _try_rational(sys.h.product.substitute_k(u, v), sys.nv)
            if hU is None:
                raise TelescopingError("non-rational-boundary", "upper boundary term is not rational")
            rhs = rhs + CE.coerce(vec[0]) * hU
    else:
        raise TelescopingError("bad-bounds", repr(upper))
    return InhomogeneousRelation(op, rhs)


def _univariate_value(p: HyperProduct, nv: str) -> RationalFunction:
    """Value of a product with no n-dependent factorials or powers."""
    val = RF(p.const)
    for lin, e in p.factorials:
        from math import factorial
        if lin.c < 0:
            if e < 0:
                return RF(0)
            raise TelescopingError("pole", str(lin))
        val = val * RF(Fraction(factorial(lin.c)) ** e)
    for base, lin in p.powers:
        val = val * base ** lin.c
    return val * p.extra


def _hyper_at_k(sys: SummandSystem, k0: int):
    """h(n, k0) as a rational function in n, or None if it is not rational."""
    p = sys.h.product
    if p is None:
        return None
    q = p.substitute_k(0, k0)
    return _try_rational(q, sys.nv)


def _try_rational(q: HyperProduct, nv: str):
    """Pair n-dependent factorials of q among themselves; None if impossible."""
    num = tuple((l, e) for l, e in q.factorials if e > 0 and l.a)
    den = tuple((l, -e) for l, e in q.factorials if e < 0 and l.a)
    if any(l.a for _, l in q.powers):
        return None
    if not num and not den:
        return _univariate_value(q, nv)
    a = HyperProduct(q.nvar, q.kvar, Fraction(1), num)
    b = HyperProduct(q.nvar, q.kvar, Fraction(1), den)
    try:
        ratio = a.quotient(b)
    except HyperError:
        return None
    rest = HyperProduct(q.nvar, q.kvar, q.const,
                        tuple((l, e) for l, e in q.factorials if not l.a), q.powers, q.extra)
    return ratio * _univariate_value(rest, nv)


def _upper_boundary_vector(cert, sys, g, u, v):
    """Coefficients (relative to h(n, u n + v), in the basis f(U+1+j)) of
    G(n, U+1) + sum_i c_i sum_{k=U+1}^{U(n+i)} F(n+i, k), with U = u n + v."""
    kv, nv = sys.kv, sys.nv
    n = var(nv)
    U = n * u + v
    # G(n,k+1) relative to h(n,k) in basis e(k): ratio_k * act_k(g); we need the
    # basis at k = U + 1, so express f(U + m) through e(U+1).
    rk = sys.h.ratio_k
    shifted = [rk * x for x in sys.act_k(g)]          # basis e(k) ; G(n,k+1)/h(n,k)
    # rewrite e(k) -> e(k+1) is not invertible in general; instead collect
    # everything in the basis e(U) and require cancellation there.
    total = _eval_vector_at(shifted, kv, U)
    p = sys.h.product
    if p is None:
        raise TelescopingError("no-closed-form", "boundary summation needs an explicit h")
    hU = p.substitute_k(u, v)
    for i, c in enumerate(cert.telescoper):
        if c.is_zero():
            continue
        for m in range(1, u * i + 1):
            # F(n+i, U+m) / h(n, U) in basis e(U)
            hk = _shift_then_substitute(p, i, u, v + m)
            try:
                q = hk.quotient(hU)
            except HyperError as exc:
                raise TelescopingError("boundary", str(exc)) from None
            fvec = sys.shifted_basis_vector(m)
            fvec = _eval_vector_at(fvec, kv, U)
            total = [t + c * q * f for t, f in zip(total, fvec)]
    return total


def _shift_then_substitute(p: HyperProduct, dn: int, u: int, v: int) -> HyperProduct:
    """n -> h(n + dn, u n + v)."""
    from .hyper import Linear
    fac = tuple((Linear(l.a + l.b * u, 0, l.c + l.a * dn + l.b * v), e) for l, e in p.factorials)
    pw = tuple((b, Linear(l.a + l.b * u, 0, l.c + l.a * dn + l.b * v)) for b, l in p.powers)
    ex = p.extra.compose({p.nvar: var(p.nvar) + dn, p.kvar: var(p.nvar) * u + v})
    return HyperProduct(p.nvar, p.kvar, p.const, fac, pw, ex)


# ---------------------------------------------------------------------------
# building summand modules from factors

def kron_matrices(a: list, b: list) -> list:
    """Shift action on the tensor basis e_i (x) f_j (index i*len(b) + j)."""
    da, db = len(a), len(b)
    out = []
    for i in range(da):
        for j in range(db):
            col = [RF(0)] * (da * db)
            for p, x in enumerate(a[i]):
                if x.is_zero():
                    continue
                for q, y in enumerate(b[j]):
                    if not y.is_zero():
                        col[p * db + q] = col[p * db + q] + x * y
            out.append(col)
    return out


def leibniz_matrices(a: list | None, b: list | None, da: int, db: int) -> list:
    """Derivation on the tensor basis from derivations of the factors (None = constant)."""
    out = []
    for i in range(da):
        for j in range(db):
            col = [RF(0)] * (da * db)
            if a is not None:
                for p, x in enumerate(a[i]):
                    col[p * db + j] = col[p * db + j] + x
            if b is not None:
                for q, y in enumerate(b[j]):
                    col[i * db + q] = col[i * db + q] + y
            out.append(col)
    return out

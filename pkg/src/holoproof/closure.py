"""Closure properties of holonomic functions and P-recursive sequences."""

from __future__ import annotations

from .arith import RF, RationalFunction, poly_coeff_in, var
from .ore import (DIFF, SHIFT, FiniteModule, OreError, OreOperator, clear_denominators,
                  companion, lclm, primitive, tensor, unit_vector)


def _same(a: OreOperator, b: OreOperator, kind: str | None = None):
    if a.kind != b.kind or a.var != b.var:
        raise OreError("incompatible-operators", f"{a.kind}[{a.var}] vs {b.kind}[{b.var}]")
    if kind is not None and a.kind != kind:
        raise OreError("incompatible-operators", f"expected {kind} operators")


def re_plus(a: OreOperator, b: OreOperator) -> OreOperator:
    _same(a, b)
    return lclm(a, b)


def _product_module(a: OreOperator, b: OreOperator) -> OreOperator:
    if a.order == 0 or b.order == 0:
        # an order-0 operator only admits the zero solution
        return primitive(OreOperator(a.kind, a.var, [1]))
    m = tensor(companion(a), companion(b))
    return m.annihilator(unit_vector(m.dim, 0))


def re_hadamard(a: OreOperator, b: OreOperator) -> OreOperator:
    """Annihilator of the termwise product of solutions of two recurrences."""
    _same(a, b, SHIFT)
    return _product_module(a, b)


def de_product(a: OreOperator, b: OreOperator) -> OreOperator:
    """Annihilator of the product of solutions of two differential equations."""
    _same(a, b, DIFF)
    return _product_module(a, b)


def de_plus(a: OreOperator, b: OreOperator) -> OreOperator:
    _same(a, b, DIFF)
    return lclm(a, b)


def re_shift(a: OreOperator, j: int) -> OreOperator:
    """Annihilator of n -> f(n+j)."""
    if a.kind != SHIFT:
        raise OreError("incompatible-operators", "re_shift needs a shift operator")
    if j == 0:
        return a
    return OreOperator(SHIFT, a.var, [c.shift(a.var, j) for c in a.coeffs])


def re_section(a: OreOperator, m: int, r: int) -> OreOperator:
    """Annihilator of n -> f(m n + r)."""
    if a.kind != SHIFT:
        raise OreError("incompatible-operators", "re_section needs a shift operator")
    if m < 1 or not 0 <= r < m:
        raise OreError("bad-section", f"m={m}, r={r}")
    if m == 1 and r == 0:
        return a
    base = companion(clear_denominators(a))
    d = base.dim
    cols = []
    for j in range(d):
        v = unit_vector(d, j)
        for _ in range(m):
            v = base.act(v)
        cols.append(v)
    n = var(a.var)
    sub = {a.var: n * m + r}
    matrix = [[c.compose(sub) for c in col] for col in cols]
    mod = FiniteModule(SHIFT, a.var, matrix)
    return mod.annihilator(unit_vector(d, 0))


# ---------------------------------------------------------------------------
# sequences <-> generating functions

def _theta_poly_apply(p: RationalFunction, nvar: str, shift: int, tvar: str):
    """p(theta + shift) as a list of coefficients of D^k (theta = t D)."""
    # expand p(x + shift) in powers of x, then theta^e = sum_k S2(e,k) t^k D^k
    q = p.compose({nvar: var(nvar) + shift}) if shift else p
    parts = poly_coeff_in(q.num, nvar)
    out: dict[int, RationalFunction] = {}
    t = RF(var(tvar))
    for e, c in parts.items():
        for k in range(e + 1):
            s = _stirling2(e, k)
            if s:
                out[k] = out.get(k, RF(0)) + RF(c) * s * t ** k
    return out


_ST2: dict = {}


def _stirling2(e: int, k: int) -> int:
    if (e, k) in _ST2:
        return _ST2[e, k]
    if e == k:
        v = 1
    elif k == 0 or k > e:
        v = 0
    else:
        v = k * _stirling2(e - 1, k) + _stirling2(e - 1, k - 1)
    _ST2[e, k] = v
    return v


def re2de(a: OreOperator, tvar: str = "t", start: int = 0) -> OreOperator:
    """Differential operator in ``tvar`` for sum_n f(n) t^n, given that ``a``
    annihilates f(n) for all n >= start."""
    if a.kind != SHIFT:
        raise OreError("incompatible-operators", "re2de needs a shift operator")
    a = clear_denominators(a)
    nv = a.var
    d = a.order
    t = RF(var(tvar))
    total: dict[int, RationalFunction] = {}
    for i, p in enumerate(a.coeffs):
        if p.is_zero():
            continue
        for k, c in _theta_poly_apply(p, nv, -i, tvar).items():
            total[k] = total.get(k, RF(0)) + c * t ** (d - i)
    L = OreOperator(DIFF, tvar, [total.get(k, RF(0)) for k in range(max(total) + 1)])
    # L F equals a polynomial built from the initial terms; find its degree bound
    if start == 0:
        top = -1
        for i, p in enumerate(a.coeffs):
            for m in range(i):
                if not p.subs({nv: m - i}).is_zero():
                    top = max(top, d - i + m)
    else:
        top = d + start - 1
    if top >= 0:
        L = OreOperator(DIFF, tvar, [0] * (top + 1) + [1]) * L
    return _strip_t_power(primitive(L), tvar)


def _strip_t_power(L: OreOperator, tvar: str) -> OreOperator:
    low = None
    for c in L.coeffs:
        if c.is_zero():
            continue
        parts = poly_coeff_in(c.num, tvar)
        e = min(parts)
        low = e if low is None else min(low, e)
    if low:
        t = RF(var(tvar))
        L = OreOperator(L.kind, L.var, [c / t ** low for c in L.coeffs])
    return L


def de2re(L: OreOperator, nvar: str = "n", return_start: bool = False):
    """Recurrence for the Taylor coefficients of solutions of ``L`` at 0."""
    if L.kind != DIFF:
        raise OreError("incompatible-operators", "de2re needs a derivation")
    L = clear_denominators(L)
    tv = L.var
    terms = []  # (i, j, coefficient)
    for i, c in enumerate(L.coeffs):
        for j, cc in poly_coeff_in(c.num, tv).items():
            terms.append((i, j, RF(cc)))
    svals = [j - i for i, j, _ in terms]
    smax, smin = max(svals), min(svals)
    n = var(nvar)
    P = [RF(0)] * (smax - smin + 1)
    for i, j, cc in terms:
        k = smax - (j - i)
        fall = RF(1)
        for q in range(i):
            fall = fall * RF(n + k - q)
        P[k] = P[k] + cc * fall
    op = primitive(OreOperator(SHIFT, nvar, P))
    if return_start:
        return op, max(0, -smax)
    return op


def re_cauchy(a: OreOperator, b: OreOperator) -> OreOperator:
    """Annihilator of the convolution sum_{i<=n} f(i) g(n-i)."""
    _same(a, b, SHIFT)
    tv = "x"
    da = re2de(a, tv)
    db = re2de(b, tv)
    prod = de_product(da, db)
    return de2re(prod, a.var)


# ---------------------------------------------------------------------------
# algebraic substitution

class _UPoly:
    """Univariate polynomials in the algebraic variable with RationalFunction coefficients."""

    @staticmethod
    def trim(p):
        p = list(p)
        while p and p[-1].is_zero():
            p.pop()
        return p

    @staticmethod
    def add(p, q):
        n = max(len(p), len(q))
        return _UPoly.trim([(p[i] if i < len(p) else RF(0)) + (q[i] if i < len(q) else RF(0))
                            for i in range(n)])

    @staticmethod
    def scale(p, c):
        return _UPoly.trim([x * c for x in p])

    @staticmethod
    def mul(p, q):
        if not p or not q:
            return []
        out = [RF(0)] * (len(p) + len(q) - 1)
        for i, x in enumerate(p):
            if x.is_zero():
                continue
            for j, y in enumerate(q):
                if not y.is_zero():
                    out[i + j] = out[i + j] + x * y
        return _UPoly.trim(out)

    @staticmethod
    def divmod(p, q):
        p = list(p)
        quo = [RF(0)] * max(len(p) - len(q) + 1, 0)
        inv = q[-1].inverse()
        while len(p) >= len(q) and p:
            c = p[-1] * inv
            k = len(p) - len(q)
            quo[k] = c
            for i, y in enumerate(q):
                p[i + k] = p[i + k] - c * y
            p = _UPoly.trim(p[:-1] if p[-1].is_zero() else p)
        return _UPoly.trim(quo), _UPoly.trim(p)

    @staticmethod
    def rem(p, q):
        return _UPoly.divmod(p, q)[1]

    @staticmethod
    def inverse_mod(a, m):
        """a^{-1} mod m via the extended Euclidean algorithm."""
        r0, r1 = list(m), _UPoly.rem(a, m)
        s0, s1 = [], [RF(1)]
        while r1:
            q, r = _UPoly.divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _UPoly.add(s0, _UPoly.scale(_UPoly.mul(q, s1), RF(-1)))
        if len(r0) != 1:
            raise OreError("degenerate-algebraic-relation", "not invertible modulo the relation")
        return _UPoly.scale(s0, r0[0].inverse())

    @staticmethod
    def derivative(p):
        return _UPoly.trim([p[i] * i for i in range(1, len(p))])


def _as_upoly(r: RationalFunction, gvar: str):
    """Split a rational function polynomial in gvar (denominator free of gvar)."""
    dparts = poly_coeff_in(r.den, gvar)
    if set(dparts) != {0}:
        raise OreError("degenerate-algebraic-relation", f"denominator depends on {gvar}")
    inv = RF(1) / RF(r.den)
    parts = poly_coeff_in(r.num, gvar)
    if not parts:
        return []
    out = [RF(0)] * (max(parts) + 1)
    for e, c in parts.items():
        out[e] = RF(c) * inv
    return _UPoly.trim(out)


def algebraic_compose(L: OreOperator, P, outer: str = "t", gvar: str = "g") -> OreOperator:
    """Annihilator in D[outer] of f(g(outer)) where L annihilates f (a derivation in
    L.var) and P(outer, g) = 0 defines g algebraically."""
    if L.kind != DIFF:
        raise OreError("incompatible-operators", "algebraic_compose needs a derivation")
    P = RF(P) if not isinstance(P, RationalFunction) else P
    Pu = _as_upoly(P, gvar)
    deg = len(Pu) - 1
    if deg < 1:
        raise OreError("degenerate-algebraic-relation", "relation does not involve g")
    # squarefree check: gcd(P, dP/dg) must be constant
    r0, r1 = Pu, _UPoly.derivative(Pu)
    while r1:
        r0, r1 = r1, _UPoly.rem(r0, r1)
    if len(r0) > 1:
        raise OreError("degenerate-algebraic-relation", "relation is not squarefree in g")
    mon = _UPoly.scale(Pu, Pu[-1].inverse())
    # g' = -P_t / P_g mod P
    Pt = _as_upoly(P.diff(outer), gvar)
    Pg = _as_upoly(P.diff(gvar), gvar)
    gprime = _UPoly.rem(_UPoly.scale(_UPoly.mul(Pt, _UPoly.inverse_mod(Pg, mon)), RF(-1)), mon)
    # coefficients of L with its variable replaced by g
    Lc = clear_denominators(L)
    sub = {L.var: var(gvar)}
    lcoeffs = [_as_upoly(c.compose(sub), gvar) for c in Lc.coeffs]
    d = Lc.order
    lead_inv = _UPoly.inverse_mod(lcoeffs[-1], mon)
    reduce_top = [_UPoly.rem(_UPoly.scale(_UPoly.mul(c, lead_inv), RF(-1)), mon) for c in lcoeffs[:-1]]

    dim = deg * d

    def idx(a, b):
        return b * deg + a

    def add_poly(vec, poly, b):
        """vec += poly(g) * f^(b)"""
        if b < d:
            for a, c in enumerate(poly):
                if not c.is_zero():
                    vec[idx(a, b)] = vec[idx(a, b)] + c
        else:
            for i in range(d):
                pr = _UPoly.rem(_UPoly.mul(poly, reduce_top[i]), mon)
                for a, c in enumerate(pr):
                    if not c.is_zero():
                        vec[idx(a, i)] = vec[idx(a, i)] + c

    matrix = []
    for b in range(d):
        for a in range(deg):
            col = [RF(0)] * dim
            if a > 0:
                ga = [RF(0)] * (a - 1) + [RF(a)]
                add_poly(col, _UPoly.rem(_UPoly.mul(ga, gprime), mon), b)
            gpow = [RF(0)] * a + [RF(1)]
            add_poly(col, _UPoly.rem(_UPoly.mul(gpow, gprime), mon), b + 1)
            matrix.append(col)
    # matrix is indexed by basis position; reorder to idx order
    ordered = [None] * dim
    pos = 0
    for b in range(d):
        for a in range(deg):
            ordered[idx(a, b)] = matrix[pos]
            pos += 1
    mod = FiniteModule(DIFF, outer, ordered)
    return mod.annihilator(unit_vector(dim, idx(0, 0)))

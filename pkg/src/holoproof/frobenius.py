"""Local analysis of differential operators at a rational point.

The indicial polynomial is read off the lowest-valuation part of
z^-sigma L z^sigma, normalized by the lowest coefficient of the leading
coefficient, so at a regular singular point it is exactly
[z^0] p_s(z)^-1 z^(s-sigma) L z^sigma.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import (CTX, RF, ArithmeticError_, MultiPoly, _to_fmpq, const_poly, integer_roots_nonneg,
                    poly_coeff_in, poly_degree, poly_variables, to_fraction, var)
from .ore import DIFF, SHIFT, OreOperator, clear_denominators
from .series import SeriesError, SymbolicSeries

ORDINARY = "ordinary"
REGULAR_SINGULAR = "regular_singular"
IRREGULAR_SINGULAR = "irregular_singular"

SIGMA = "sigma"


class FrobeniusError(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


@dataclass
class IndicialRoot:
    value: Fraction | None          # None when the root is not rational
    multiplicity: int
    factor: str = ""                # the irreducible factor for non-rational roots

    @property
    def rational(self) -> bool:
        return self.value is not None


@dataclass
class LocalData:
    point: Fraction
    point_class: str
    indicial: MultiPoly
    roots: list = field(default_factory=list)
    required_monomials: list = field(default_factory=list)   # (exponent, log power)

    @property
    def initial_count(self) -> int:
        return len(self.required_monomials)


def _falling(s: MultiPoly, i: int) -> MultiPoly:
    out = CTX.constant(1)
    for j in range(i):
        out = out * (s - j)
    return out


def _recentered(L: OreOperator, z0) -> OreOperator:
    if L.kind != DIFF:
        raise FrobeniusError("bad-operator", "local analysis needs a derivation operator")
    L = clear_denominators(L)
    z0 = Fraction(z0)
    if z0 == 0:
        return L
    zv = var(L.var)
    return OreOperator(DIFF, L.var, [c.compose({L.var: zv + const_poly(z0)}) for c in L.coeffs])


def _valuation_parts(L: OreOperator):
    """(ord_z a_i, lowest coefficient) for every nonzero coefficient."""
    out = {}
    for i, c in enumerate(L.coeffs):
        if c.is_zero():
            continue
        parts = poly_coeff_in(c.num, L.var)
        low = min(parts)
        out[i] = (low, parts[low])
    return out


def indicial_polynomial(L: OreOperator, z0=0) -> MultiPoly:
    """Indicial polynomial in ``sigma`` at z = z0."""
    if L.is_zero() or L.leading.is_zero():
        raise FrobeniusError("degenerate", "leading coefficient vanishes identically")
    L = _recentered(L, z0)
    parts = _valuation_parts(L)
    s = L.order
    v = min(low - i for i, (low, _) in parts.items())
    sig = var(SIGMA)
    out = CTX.constant(0)
    for i, (low, coeff) in parts.items():
        if low - i == v:
            out = out + coeff * _falling(sig, i)
    lead_low = parts[s][1]
    if not lead_low.is_constant():
        out = (RF(out) / RF(lead_low))
        if not out.is_polynomial():
            raise FrobeniusError("degenerate", "parametric leading coefficient")
        return out.num
    return out / lead_low.leading_coefficient()


def indicial_roots(p: MultiPoly) -> list[IndicialRoot]:
    if p.is_constant():
        return []
    _, facs = p.factor()
    out = []
    for f, e in facs:
        if poly_degree(f, SIGMA) <= 0:
            continue
        others = set(poly_variables(f)) - {SIGMA}
        parts = poly_coeff_in(f, SIGMA)
        if poly_degree(f, SIGMA) == 1 and not others:
            a = to_fraction(parts[1].leading_coefficient())
            b = to_fraction(parts[0].leading_coefficient()) if 0 in parts else Fraction(0)
            out.append(IndicialRoot(-b / a, int(e)))
        else:
            out.append(IndicialRoot(None, int(e), str(f)))
    out.sort(key=lambda r: (r.value is None, r.value if r.value is not None else 0))
    return out


def classify_point(L: OreOperator, z0=0) -> LocalData:
    z0 = Fraction(z0)
    Lc = _recentered(L, z0)
    s = Lc.order
    ind = indicial_polynomial(Lc, 0)
    lead = Lc.leading.num
    lead_at = lead.subs({Lc.var: 0}) if Lc.var in poly_variables(lead) else lead
    if not lead_at.is_zero():
        return LocalData(z0, ORDINARY, ind, indicial_roots(ind), [(Fraction(i), 0) for i in range(s)])
    deg = poly_degree(ind, SIGMA) if not ind.is_constant() else 0
    roots = indicial_roots(ind)
    if deg != s:
        return LocalData(z0, IRREGULAR_SINGULAR, ind, roots, [])
    mons = []
    for r in roots:
        for j in range(r.multiplicity):
            mons.append((r.value, j))
    return LocalData(z0, REGULAR_SINGULAR, ind, roots, mons)


def leading_integer_roots(A: OreOperator) -> list[int]:
    """Nonnegative integer roots n of the leading coefficient of a recurrence."""
    if A.kind != SHIFT:
        raise FrobeniusError("bad-operator", "need a shift operator")
    lead = clear_denominators(A).leading.num
    roots = set()
    if not lead.is_constant():
        _, facs = lead.factor()
        for f, _ in facs:
            if set(poly_variables(f)) == {A.var}:
                try:
                    roots.update(integer_roots_nonneg(f, A.var))
                except ArithmeticError_:
                    pass
    return sorted(roots)


def re_initial_count(A: OreOperator) -> int:
    """Initial terms needed so that unrolling ``A`` determines the sequence."""
    return A.order + max([-1] + leading_integer_roots(A)) + 1


# ---------------------------------------------------------------------------
# generalized series solutions

def _phi_table(L: OreOperator):
    """Pairs (q - i, coefficient, i) with L = sum a_iq z^q D^i."""
    table = []
    for i, c in enumerate(L.coeffs):
        if c.is_zero():
            continue
        for q, part in poly_coeff_in(c.num, L.var).items():
            table.append((q - i, RF(part), i))
    return table


def _falling_value(mu: Fraction, i: int) -> Fraction:
    out = Fraction(1)
    for j in range(i):
        out *= mu - j
    return out


def _falling_derivative(mu: Fraction, i: int) -> Fraction:
    total = Fraction(0)
    for j in range(i):
        term = Fraction(1)
        for l in range(i):
            if l != j:
                term *= mu - l
        total += term
    return total


def frobenius_solution(L: OreOperator, sigma, N: int, data: dict) -> SymbolicSeries:
    """The solution z^sigma (Phi_0 + log z Phi_1) with Phi's truncated at degree N.

    ``data`` maps the unconstrained monomials (offset, log power) - offsets
    counted from sigma - to chosen coefficients; missing entries default to 0.
    The result is exact up to z^(sigma+N).
    """
    L = clear_denominators(L)
    sigma = Fraction(sigma)
    table = _phi_table(L)
    v = min(d for d, _, _ in table)
    c0: list = []
    c1: list = []
    for m in range(N + 1):
        # coefficient of z^(sigma + v + m) in L(sum), split into log and plain parts
        acc_log = RF(0)
        acc_plain = RF(0)
        own_log = RF(0)
        own_plain_from_log = RF(0)
        for d, a, i in table:
            n = m + v - d
            if n < 0 or n > m:
                continue
            mu = sigma + n
            f, fd = _falling_value(mu, i), _falling_derivative(mu, i)
            if n == m:
                own_log = own_log + a * f
                own_plain_from_log = own_plain_from_log + a * fd
                continue
            acc_log = acc_log + a * f * c1[n]
            acc_plain = acc_plain + a * f * c0[n] + a * fd * c1[n]
        # own_log is the indicial value I(sigma + m) times the lowest coefficient
        if own_log.is_zero():
            if not acc_log.is_zero():
                raise FrobeniusError("log-degree", f"log^2 terms needed at offset {m}")
            x1 = RF(data.get((m, 1), 0))
            rest = acc_plain + own_plain_from_log * x1
            if not rest.is_zero():
                if (m, 1) in data:
                    raise FrobeniusError("inconsistent-data", f"offset {m}")
                raise FrobeniusError("log-degree", f"logarithm forced at offset {m}")
            x0 = RF(data.get((m, 0), 0))
        else:
            x1 = -acc_log / own_log
            x0 = -(acc_plain + own_plain_from_log * x1) / own_log
            for key in ((m, 0), (m, 1)):
                if key in data:
                    raise FrobeniusError("constrained-monomial", f"offset {m} is determined by earlier terms")
        c0.append(x0)
        c1.append(x1)
    try:
        return SymbolicSeries(L.var, sigma, c0, c1)
    except SeriesError as exc:
        raise FrobeniusError("bad-series", str(exc)) from None


def free_offsets(L: OreOperator, sigma, N: int) -> list[int]:
    """Offsets m <= N at which the indicial polynomial vanishes at sigma + m."""
    ind = indicial_polynomial(L)
    out = []
    for m in range(N + 1):
        val = ind.subs({SIGMA: _to_fmpq(Fraction(sigma) + m)}) if SIGMA in poly_variables(ind) else ind
        if val.is_zero():
            out.append(m)
    return out

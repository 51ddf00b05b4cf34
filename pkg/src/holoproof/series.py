"""Truncated generalized power series z^alpha * sum_n (a_n + b_n log z) z^n
with coefficients in the constant ring, plus the catalog of base expansions."""

from __future__ import annotations

from fractions import Fraction
from math import factorial

from .arith import RF, poly_coeff_in, var
from .constants import (COS, CE, EULER_GAMMA, LOG2, ONE, SIN, SINH, COSH, SQRT2, SQRTPI,
                        ZERO, ConstantExpr)


class SeriesError(ValueError):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


def _ce(x) -> ConstantExpr:
    return x if isinstance(x, ConstantExpr) else CE.const(x)


class SymbolicSeries:
    """Coefficients ``c0[i]`` (plain) and ``c1[i]`` (times log var) of var^(alpha+i), i = 0..N."""

    __slots__ = ("var", "alpha", "c0", "c1")

    def __init__(self, var_name: str, alpha, c0, c1=None):
        self.var = var_name
        self.alpha = Fraction(alpha)
        self.c0 = [_ce(x) for x in c0]
        self.c1 = [_ce(x) for x in c1] if c1 is not None else [ZERO] * len(self.c0)
        if len(self.c1) != len(self.c0):
            raise SeriesError("bad-series", "slot lengths differ")
        if not self.c0:
            raise SeriesError("order-underflow", "empty series")

    @property
    def order(self) -> int:
        return len(self.c0) - 1

    @property
    def top(self) -> Fraction:
        """Largest exponent whose coefficient is known exactly."""
        return self.alpha + self.order

    def has_log(self) -> bool:
        return any(not x.is_zero() for x in self.c1)

    def coeff(self, exponent, log_power: int = 0) -> ConstantExpr:
        e = Fraction(exponent)
        i = e - self.alpha
        if i.denominator != 1 or i > self.order:
            if i > self.order:
                raise SeriesError("order-underflow", f"exponent {e} beyond {self.top}")
            return ZERO
        if i < 0:
            return ZERO
        slot = self.c0 if log_power == 0 else self.c1
        return slot[int(i)]

    def truncate(self, top) -> "SymbolicSeries":
        k = int(Fraction(top) - self.alpha)
        if k > self.order:
            raise SeriesError("order-underflow", f"cannot extend to {top}")
        return SymbolicSeries(self.var, self.alpha, self.c0[:k + 1], self.c1[:k + 1])

    def realign(self, alpha) -> "SymbolicSeries":
        """Same series written with a smaller (integer-offset) starting exponent."""
        alpha = Fraction(alpha)
        d = self.alpha - alpha
        if d.denominator != 1 or d < 0:
            raise SeriesError("alpha-mismatch", f"{self.alpha} vs {alpha}")
        pad = [ZERO] * int(d)
        return SymbolicSeries(self.var, alpha, pad + self.c0, pad + self.c1)

    def __add__(self, other):
        if not isinstance(other, SymbolicSeries):
            other = constant_series(self.var, _ce(other), self.top)
        _check_var(self, other)
        a = min(self.alpha, other.alpha)
        x, y = self.realign(a), other.realign(a)
        n = min(x.order, y.order)
        return SymbolicSeries(self.var, a,
                              [p + q for p, q in zip(x.c0[:n + 1], y.c0[:n + 1])],
                              [p + q for p, q in zip(x.c1[:n + 1], y.c1[:n + 1])])

    __radd__ = __add__

    def __neg__(self):
        return SymbolicSeries(self.var, self.alpha, [-x for x in self.c0], [-x for x in self.c1])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "SymbolicSeries":
        c = _ce(c)
        return SymbolicSeries(self.var, self.alpha, [x * c for x in self.c0], [x * c for x in self.c1])

    def __mul__(self, other):
        if not isinstance(other, SymbolicSeries):
            return self.scale(other)
        _check_var(self, other)
        n = min(self.order, other.order)
        c0, c1 = [], []
        for k in range(n + 1):
            s0 = ZERO
            s1 = ZERO
            for i in range(k + 1):
                a0, a1 = self.c0[i], self.c1[i]
                b0, b1 = other.c0[k - i], other.c1[k - i]
                if not a0.is_zero():
                    if not b0.is_zero():
                        s0 = s0 + a0 * b0
                    if not b1.is_zero():
                        s1 = s1 + a0 * b1
                if not a1.is_zero():
                    if not b1.is_zero():
                        raise SeriesError("log-degree", "log^2 terms are not supported")
                    if not b0.is_zero():
                        s1 = s1 + a1 * b0
            c0.append(s0)
            c1.append(s1)
        return SymbolicSeries(self.var, self.alpha + other.alpha, c0, c1)

    __rmul__ = __mul__

    def shift_exponent(self, k) -> "SymbolicSeries":
        """Multiply by var^k."""
        return SymbolicSeries(self.var, self.alpha + Fraction(k), self.c0, self.c1)

    def derivative(self) -> "SymbolicSeries":
        c0, c1 = [], []
        for i in range(self.order + 1):
            e = self.alpha + i
            c0.append(self.c0[i] * RF(e) + self.c1[i])
            c1.append(self.c1[i] * RF(e))
        return SymbolicSeries(self.var, self.alpha - 1, c0, c1)

    def map_coeffs(self, fn) -> "SymbolicSeries":
        return SymbolicSeries(self.var, self.alpha, [fn(x) for x in self.c0], [fn(x) for x in self.c1])

    def is_zero(self) -> bool:
        return all(x.is_zero() for x in self.c0) and all(x.is_zero() for x in self.c1)

    def first_nonzero(self):
        """(exponent, log power, coefficient) of the first nonzero slot or None."""
        for i in range(self.order + 1):
            if not self.c0[i].is_zero():
                return self.alpha + i, 0, self.c0[i]
            if not self.c1[i].is_zero():
                return self.alpha + i, 1, self.c1[i]
        return None

    def __eq__(self, other):
        if not isinstance(other, SymbolicSeries):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        head = []
        for i in range(min(self.order + 1, 4)):
            e = self.alpha + i
            head.append(f"({self.c0[i]})*{self.var}^{e}")
        return f"SymbolicSeries({' + '.join(head)} + O({self.var}^{self.top + 1}))"


def _check_var(a: SymbolicSeries, b: SymbolicSeries):
    if a.var != b.var:
        raise SeriesError("incompatible-series", f"{a.var} vs {b.var}")


def series_arith(a: SymbolicSeries, b: SymbolicSeries, op: str) -> SymbolicSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "sub":
        return a - b
    raise ValueError(op)


def series_is_zero(a: SymbolicSeries) -> bool:
    return a.is_zero()


def constant_series(var_name: str, c: ConstantExpr, top) -> SymbolicSeries:
    top = Fraction(top)
    n = max(int(top), 0)
    return SymbolicSeries(var_name, 0, [c] + [ZERO] * n)


def monomial_series(var_name: str, exponent: int, c, top) -> SymbolicSeries:
    n = int(Fraction(top)) - exponent
    if n < 0:
        raise SeriesError("order-underflow")
    return SymbolicSeries(var_name, exponent, [_ce(c)] + [ZERO] * n)


def series_apply(op, f: SymbolicSeries) -> SymbolicSeries:
    """Apply a derivation operator whose coefficients are polynomial in f.var."""
    from .ore import DIFF, clear_denominators
    if op.kind != DIFF or op.var != f.var:
        raise SeriesError("incompatible-operators", f"need D[{f.var}]")
    op = clear_denominators(op)
    derivs = [f]
    for _ in range(op.order):
        derivs.append(derivs[-1].derivative())
    total = None
    for i, c in enumerate(op.coeffs):
        if c.is_zero():
            continue
        for e, part in poly_coeff_in(c.num, f.var).items():
            term = derivs[i].scale(RF(part)).shift_exponent(e)
            total = term if total is None else total + term
    if total is None:
        return f.scale(0)
    # the result has a known order limited by the most differentiated term
    return total


# ---------------------------------------------------------------------------
# expanding closed forms in sin, cos, ... with Laurent coefficients

def _taylor(name: str, n: int, m=1) -> list[Fraction]:
    """Coefficients of name(m*z) up to z^n."""
    m = Fraction(m)
    out = []
    for i in range(n + 1):
        if name == "sin":
            c = Fraction((-1) ** ((i - 1) // 2), factorial(i)) if i % 2 else Fraction(0)
        elif name == "cos":
            c = Fraction((-1) ** (i // 2), factorial(i)) if i % 2 == 0 else Fraction(0)
        elif name == "sinh":
            c = Fraction(1, factorial(i)) if i % 2 else Fraction(0)
        elif name == "cosh":
            c = Fraction(1, factorial(i)) if i % 2 == 0 else Fraction(0)
        elif name == "exp":
            c = Fraction(1, factorial(i))
        elif name == "expm":
            c = Fraction((-1) ** i, factorial(i))
        else:
            raise SeriesError("unsupported-expansion", name)
        out.append(c * m ** i)
    return out


_FUNC_GENS = ("sin", "cos", "sinh", "cosh", "exp", "expm")


def expand_constexpr(e: ConstantExpr, var_name: str, top: int) -> SymbolicSeries:
    """Series in var of an element whose function generators are functions of var and
    whose coefficients are Laurent polynomials in var."""
    from .constants import GENERATORS
    pieces = []
    for mono, coeff in e.terms.items():
        den_parts = poly_coeff_in(coeff.den, var_name)
        if len(den_parts) != 1:
            raise SeriesError("unsupported-expansion", f"denominator {coeff.den} is not a monomial in {var_name}")
        (dexp, dcoef), = den_parts.items()
        inv = RF(1) / RF(dcoef)
        funcs = {g: ex for g, ex in zip(GENERATORS, mono) if ex and g in _FUNC_GENS}
        const_mono = tuple(ex if g not in _FUNC_GENS else 0 for g, ex in zip(GENERATORS, mono))
        cpart = ConstantExpr({const_mono: RF(1)})
        need = top + dexp
        fser = [Fraction(0)] * (need + 1) if need >= 0 else []
        if need >= 0:
            fser[0] = Fraction(1)
            for g, ex in funcs.items():
                t = _taylor(g, need)
                for _ in range(ex):
                    fser = [sum((fser[i] * t[k - i] for i in range(k + 1)), Fraction(0))
                            for k in range(need + 1)]
        for nexp, ncoef in poly_coeff_in(coeff.num, var_name).items():
            scale = cpart * (RF(ncoef) * inv)
            start = nexp - dexp
            # coefficients of var^(start + i) for start + i <= top
            count = top - start + 1
            if count <= 0:
                continue
            vals = [scale * RF(fser[i]) if fser[i] else ZERO for i in range(count)]
            pieces.append(SymbolicSeries(var_name, start, vals))
    if not pieces:
        return SymbolicSeries(var_name, 0, [ZERO] * (max(top, 0) + 1))
    lo = min(p.alpha for p in pieces)
    total = SymbolicSeries(var_name, lo, [ZERO] * int(top - lo + 1))
    for p in pieces:
        total = total + p
    return total


# ---------------------------------------------------------------------------
# special values

def harmonic(n: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def psi_half_integer(n: int) -> ConstantExpr:
    """psi(n + 3/2) = -gamma - 2 log 2 + 2 H_{2n+2} - H_{n+1}."""
    if n < -1:
        raise ValueError("n >= -1 required")
    return -EULER_GAMMA - 2 * LOG2 + CE.const(2 * harmonic(2 * n + 2) - harmonic(n + 1))


def psi_integer(n: int) -> ConstantExpr:
    """psi(n) = -gamma + H_{n-1} for n >= 1."""
    if n < 1:
        raise ValueError("psi has poles at nonpositive integers")
    return -EULER_GAMMA + CE.const(harmonic(n - 1))


def gamma_half_integer(n: int) -> ConstantExpr:
    """Gamma(n + 3/2) = sqrtpi (2n+1)! / (2 * 4^n * n!), valid for n >= -1."""
    if n == -1:
        return SQRTPI
    return SQRTPI * RF(Fraction(factorial(2 * n + 1), 2 * 4 ** n * factorial(n)))


def gamma_half_integer_reciprocal(n: int) -> ConstantExpr:
    return ONE / gamma_half_integer(n)


# ---------------------------------------------------------------------------
# spherical Bessel closed forms

def spherical_j(k: int) -> ConstantExpr:
    """j_k(z) for any integer k as A(z) sin z + B(z) cos z."""
    zinv = RF(1) / RF(var("z"))
    j0 = SIN * zinv
    jm1 = COS * zinv
    if k >= 0:
        prev, cur = jm1, j0
        for m in range(k):
            # j_{m+1} = (2m+1)/z j_m - j_{m-1}
            prev, cur = cur, cur * (zinv * (2 * m + 1)) - prev
        return cur
    cur, nxt = jm1, j0
    for m in range(-1, k, -1):
        # j_{m-1} = (2m+1)/z j_m - j_{m+1}
        cur, nxt = cur * (zinv * (2 * m + 1)) - nxt, cur
    return cur


def spherical_y(k: int) -> ConstantExpr:
    """y_k = (-1)^(k+1) j_(-k-1)."""
    return spherical_j(-k - 1) * (1 if (k + 1) % 2 == 0 else -1)


def modified_spherical(m: int) -> ConstantExpr:
    """u_m(z) = sqrt(pi/(2z)) I_(m+1/2)(z):  u_0 = sinh z/z, u_(-1) = cosh z/z,
    u_(m-1) - u_(m+1) = (2m+1)/z u_m."""
    zinv = RF(1) / RF(var("z"))
    u0 = SINH * zinv
    um1 = COSH * zinv
    if m >= 0:
        prev, cur = um1, u0
        for i in range(m):
            prev, cur = cur, prev - cur * (zinv * (2 * i + 1))
        return cur
    cur, nxt = um1, u0
    for i in range(-1, m, -1):
        cur, nxt = nxt + cur * (zinv * (2 * i + 1)), cur
    return cur


def spherical_bessel_closed_form(kind: str, k: int, N: int | None = None):
    """Closed form of j_k or y_k; with N, also its series in z up to z^(N)."""
    if kind == "j":
        e = spherical_j(k)
    elif kind == "y":
        e = spherical_y(k)
    else:
        raise SeriesError("unsupported-expansion", f"spherical kind {kind!r}")
    if N is None:
        return e
    return e, expand_constexpr(e, "z", N)


def spherical_j_series(k: int, top: int) -> SymbolicSeries:
    """Direct power series j_k = sum_l (-1)^l z^(2l+k) / (2^l l! (2k+2l+1)!!) for k >= 0."""
    if k < 0:
        raise SeriesError("unsupported-expansion", "direct series needs k >= 0")
    vals = [ZERO] * max(top - k + 1, 1)
    l = 0
    while 2 * l <= top - k:
        dfact = 1
        for q in range(1, 2 * k + 2 * l + 2, 2):
            dfact *= q
        vals[2 * l] = CE.const(Fraction((-1) ** l, 2 ** l * factorial(l) * dfact))
        l += 1
    return SymbolicSeries("z", k, vals)


# ---------------------------------------------------------------------------
# the base expansion catalog

def _log_of_multiple(m: Fraction) -> ConstantExpr:
    """log m for m a power of two."""
    m = Fraction(m)
    if m == 1:
        return ZERO
    num, den = m.numerator, m.denominator
    for val, sign in ((num, 1), (den, -1)):
        if val & (val - 1):
            raise SeriesError("unsupported-expansion", f"log({m}) outside Q + Q log 2")
    e = num.bit_length() - 1 - (den.bit_length() - 1)
    return LOG2 * e


def si_series(m, top: int) -> SymbolicSeries:
    m = Fraction(m)
    vals = [ZERO] * (top + 1)
    for i in range(1, top + 1, 2):
        n = (i - 1) // 2
        vals[i] = CE.const(Fraction((-1) ** n, (2 * n + 1) * factorial(2 * n + 1)) * m ** i)
    return SymbolicSeries("z", 0, vals)


def ci_series(m, top: int) -> SymbolicSeries:
    m = Fraction(m)
    c0 = [ZERO] * (top + 1)
    c1 = [ZERO] * (top + 1)
    c0[0] = EULER_GAMMA + _log_of_multiple(m)
    c1[0] = ONE
    for i in range(2, top + 1, 2):
        n = i // 2
        c0[i] = CE.const(Fraction((-1) ** n, 2 * n * factorial(2 * n)) * m ** i)
    return SymbolicSeries("z", 0, c0, c1)


def ei_series(m, top: int) -> SymbolicSeries:
    m = Fraction(m)
    c0 = [ZERO] * (top + 1)
    c1 = [ZERO] * (top + 1)
    c0[0] = EULER_GAMMA + _log_of_multiple(m)
    c1[0] = ONE
    for n in range(1, top + 1):
        c0[n] = CE.const(Fraction(1, n * factorial(n)) * m ** n)
    return SymbolicSeries("z", 0, c0, c1)


def e1_series(m, top: int) -> SymbolicSeries:
    m = Fraction(m)
    c0 = [ZERO] * (top + 1)
    c1 = [ZERO] * (top + 1)
    c0[0] = -EULER_GAMMA - _log_of_multiple(m)
    c1[0] = -ONE
    for n in range(1, top + 1):
        c0[n] = CE.const(-Fraction((-1) ** n, n * factorial(n)) * m ** n)
    return SymbolicSeries("z", 0, c0, c1)


def elementary_series(name: str, m, top: int) -> SymbolicSeries:
    return SymbolicSeries("z", 0, [CE.const(c) for c in _taylor(name, top, m)])


def log_half_z_series(top: int) -> SymbolicSeries:
    """log(z/2) = log z - log 2."""
    c0 = [ZERO] * (top + 1)
    c1 = [ZERO] * (top + 1)
    c0[0] = -LOG2
    c1[0] = ONE
    return SymbolicSeries("z", 0, c0, c1)


def _psi_at(nu2: int, k: int) -> ConstantExpr:
    """psi(nu + k + 1) for nu = nu2/2 half-integer."""
    # nu + k + 1 = (k + (nu2 + 2)/2)
    twice = nu2 + 2 + 2 * k
    if twice % 2 == 0:
        return psi_integer(twice // 2)
    # twice/2 = j + 3/2  ->  j = (twice - 3)/2
    return psi_half_integer((twice - 3) // 2)


def _gamma_at(nu2: int, k: int) -> ConstantExpr:
    twice = nu2 + 2 + 2 * k
    if twice % 2 == 0:
        return CE.const(factorial(twice // 2 - 1))
    return gamma_half_integer((twice - 3) // 2)


def _half_z_power(nu: Fraction) -> tuple[Fraction, ConstantExpr]:
    """(z/2)^nu = factor * z^nu for nu in (1/2)Z; returns (nu, factor)."""
    nu = Fraction(nu)
    if nu.denominator == 1:
        return nu, CE.const(Fraction(1, 2) ** int(nu))
    # nu = p + 1/2: 2^-nu = 2^-p * 2^-1/2 = 2^-p * sqrt2/2
    p = nu - Fraction(1, 2)
    return nu, SQRT2 * RF(Fraction(1, 2) ** int(p) / 2)


def bessel_i_series(nu, top) -> SymbolicSeries:
    """I_nu(z) = (z/2)^nu sum_k (z^2/4)^k / (k! Gamma(nu+k+1)), nu in {+-1/2} (or integer >= 0)."""
    nu = Fraction(nu)
    nu2 = int(nu * 2)
    if nu * 2 != nu2:
        raise SeriesError("unsupported-expansion", f"I_{nu}")
    alpha, pref = _half_z_power(nu)
    n = int(Fraction(top) - alpha)
    vals = [ZERO] * (n + 1)
    for k in range(0, n // 2 + 1):
        g = _gamma_at(nu2, k)
        vals[2 * k] = pref * RF(Fraction(1, 4 ** k * factorial(k))) / g
    return SymbolicSeries("z", alpha, vals)


def bessel_i_dnu_series(nu, top) -> SymbolicSeries:
    """d/dnu I_nu(z) = I_nu log(z/2) - (z/2)^nu sum_k psi(nu+k+1)/Gamma(nu+k+1) (z^2/4)^k/k!."""
    nu = Fraction(nu)
    nu2 = int(nu * 2)
    alpha, pref = _half_z_power(nu)
    n = int(Fraction(top) - alpha)
    vals = [ZERO] * (n + 1)
    for k in range(0, n // 2 + 1):
        vals[2 * k] = -pref * _psi_at(nu2, k) / _gamma_at(nu2, k) * RF(Fraction(1, 4 ** k * factorial(k)))
    tail = SymbolicSeries("z", alpha, vals)
    return bessel_i_series(nu, top) * log_half_z_series(int(Fraction(top) - alpha)) + tail


def bessel_j_dnu_series(nu, top) -> SymbolicSeries:
    """d/dnu J_nu(z) = J_nu log(z/2) - (z/2)^nu sum_k (-1)^k psi(nu+k+1)/Gamma(nu+k+1) (z^2/4)^k/k!."""
    nu = Fraction(nu)
    nu2 = int(nu * 2)
    alpha, pref = _half_z_power(nu)
    n = int(Fraction(top) - alpha)
    vals = [ZERO] * (n + 1)
    jvals = [ZERO] * (n + 1)
    for k in range(0, n // 2 + 1):
        base = pref / _gamma_at(nu2, k) * RF(Fraction((-1) ** k, 4 ** k * factorial(k)))
        jvals[2 * k] = base
        vals[2 * k] = -base * _psi_at(nu2, k)
    j = SymbolicSeries("z", alpha, jvals)
    return j * log_half_z_series(n) + SymbolicSeries("z", alpha, vals)


def djnu_series(nu: int, top: int) -> SymbolicSeries:
    """d/dnu j_nu(z) at integer nu in {0, -1}: sqrt(pi/(2z)) dJ_mu/dmu at mu = nu + 1/2."""
    mu = Fraction(nu) + Fraction(1, 2)
    # sqrt(pi/(2z)) = sqrtpi * sqrt2/2 * z^(-1/2)
    pref = SymbolicSeries("z", Fraction(-1, 2), [SQRTPI * SQRT2 * RF(Fraction(1, 2))])
    inner = bessel_j_dnu_series(mu, top + Fraction(1, 2))
    out = _prefix_mul(pref, inner)
    return out


def _prefix_mul(mono: SymbolicSeries, s: SymbolicSeries) -> SymbolicSeries:
    """Multiply by a single monomial without losing truncation order."""
    c = mono.c0[0]
    return SymbolicSeries(s.var, s.alpha + mono.alpha, [x * c for x in s.c0], [x * c for x in s.c1])


def dynu_series(nu: int, top: int) -> SymbolicSeries:
    """d/dnu y_nu(z) at nu in {0, -1}.

    Differentiating Y_mu = (J_mu cos(mu pi) - J_(-mu)) / sin(mu pi) at mu = +-1/2 gives
    d y_nu at nu = 0 equal to (d j_nu at nu = -1) - pi sin z / z, and
    d y_nu at nu = -1 equal to -(d j_nu at nu = 0) - pi cos z / z.
    """
    zinv = RF(1) / RF(var("z"))
    pi = SQRTPI * SQRTPI
    if nu == 0:
        corr = expand_constexpr(pi * SIN * zinv, "z", top)
        return djnu_series(-1, top) - corr
    if nu == -1:
        corr = expand_constexpr(pi * COS * zinv, "z", top)
        return -djnu_series(0, top) - corr
    raise SeriesError("unsupported-expansion", f"dy at nu={nu}")


def modified_spherical_series(m: int, top: int) -> SymbolicSeries:
    return expand_constexpr(modified_spherical(m), "z", top)


# ---------------------------------------------------------------------------
# recurrence unrolling

_ONE_PARAM = {
    "si": si_series, "ci": ci_series, "ei": ei_series, "e1": e1_series,
    "bessel_i": bessel_i_series, "bessel_i_dnu": bessel_i_dnu_series, "bessel_j_dnu": bessel_j_dnu_series,
    "djnu": djnu_series, "dynu": dynu_series, "sphi": modified_spherical_series,
}
_ELEMENTARY = ("sin", "cos", "sinh", "cosh", "exp")
CATALOG = tuple(sorted(set(_ONE_PARAM) | set(_ELEMENTARY) | {"log_half_z", "sphj", "sphy"}))
_DEFAULTS = {"si": 1, "ci": 1, "ei": 1, "e1": 1}


def base_series(name: str, params=(), N: int = 10) -> SymbolicSeries:
    """Catalog expansion in z through z^N.

    The integral functions and elementary functions take an optional argument
    multiple m (name(m z)); the Bessel entries take their order.
    """
    params = tuple(Fraction(p) for p in params)
    try:
        if name in _ELEMENTARY:
            m = params[0] if params else 1
            return elementary_series(name, m, N)
        if name == "log_half_z":
            return log_half_z_series(N)
        if name in ("sphj", "sphy"):
            (k,) = params
            if k.denominator != 1:
                raise SeriesError("unsupported-expansion", f"{name} needs an integer order")
            return spherical_bessel_closed_form(name[-1], int(k), N)[1]
        fn = _ONE_PARAM.get(name)
        if fn is None:
            raise SeriesError("unsupported-expansion", f"unknown expansion {name!r}; known: {', '.join(CATALOG)}")
        if not params and name in _DEFAULTS:
            params = (Fraction(_DEFAULTS[name]),)
        (p,) = params
        if name in ("djnu", "dynu", "sphi"):
            if p.denominator != 1:
                raise SeriesError("unsupported-expansion", f"{name} needs an integer parameter")
            p = int(p)
        return fn(p, N)
    except ValueError as exc:
        if isinstance(exc, SeriesError):
            raise
        raise SeriesError("unsupported-expansion", f"{name}{params}: {exc}") from None


def unroll(op, initials, N: int, start: int = 0, rhs=None):
    """Values f(start), ..., f(N) of a solution of op f = rhs (rhs a callable n -> value).

    ``initials`` are f(start), f(start+1), ...; the unroller asks for more whenever the
    leading coefficient vanishes at the index it would divide by.
    """
    from .ore import SHIFT
    if op.kind != SHIFT:
        raise SeriesError("incompatible-operators", "unroll needs a shift operator")
    d = op.order
    vals = list(initials)
    lead = op.leading
    v = op.var
    while start + len(vals) <= N:
        idx = start + len(vals)  # index to compute
        n = idx - d
        lc = lead.subs({v: n})
        if lc.is_zero():
            raise SeriesError("leading-coefficient-vanishes", f"at index {idx} (n = {n})")
        if n < start:
            raise SeriesError("insufficient-initials", f"need f({idx}) explicitly")
        acc = None
        for i in range(d):
            c = op.coeffs[i]
            if c.is_zero():
                continue
            cv = c.subs({v: n})
            t = vals[n + i - start] * (cv.constant_value() if cv.is_constant() else cv)
            acc = t if acc is None else acc + t
        if rhs is not None:
            r = rhs(n)
            acc = -r if acc is None else acc - r
        if acc is None:
            acc = 0 * vals[0]
        inv = lc.inverse()
        vals.append(-acc * (inv.constant_value() if inv.is_constant() else inv))
    return vals[: N - start + 1]

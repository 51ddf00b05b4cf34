"""Independent reference computations: mpmath numerics and brute-force rationals."""

from fractions import Fraction
from math import comb, factorial

import mpmath
from mpmath import mp, mpf

from holoproof.arith import RF
from holoproof.constants import CE, GENERATORS
from holoproof.hyper import HyperProduct, HyperTerm, Linear, binomial_factors
from holoproof.ore import apply_to_sequence, diff_op, shift_op

mp.dps = 40


def _gen_value(name, z):
    return {
        "gamma": mp.euler,
        "log2": mpmath.log(2),
        "sqrtpi": mpmath.sqrt(mp.pi),
        "sqrt2": mpmath.sqrt(2),
        "sin": mpmath.sin(z),
        "cos": mpmath.cos(z),
        "sinh": mpmath.sinh(z),
        "cosh": mpmath.cosh(z),
        "exp": mpmath.exp(z),
        "expm": mpmath.exp(-z),
    }[name]


def rf_value(r, values):
    """Exact value of a rational function at rational points."""
    v = r.subs({k: Fraction(x) for k, x in values.items()})
    return v.constant_value()


def numeric(e, z, **params):
    """Numerical value of a ConstantExpr at z (rational) and the given parameters."""
    z = Fraction(z)
    zf = mpf(z.numerator) / z.denominator
    env = {"z": z, **{k: Fraction(v) for k, v in params.items()}}
    total = mpf(0)
    for mono, coeff in e.terms.items():
        c = rf_value(coeff, {k: v for k, v in env.items() if k in coeff.variables()})
        term = mpf(c.numerator) / c.denominator
        for g, p in zip(GENERATORS, mono):
            if p:
                term *= _gen_value(g, zf) ** p
        total += term
    return total


def to_mpf(x):
    x = Fraction(x)
    return mpf(x.numerator) / x.denominator


def sph_j(k, z):
    z = to_mpf(z)
    return mpmath.sqrt(mp.pi / (2 * z)) * mpmath.besselj(k + mpf(1) / 2, z)


def sph_y(k, z):
    z = to_mpf(z)
    return mpmath.sqrt(mp.pi / (2 * z)) * mpmath.bessely(k + mpf(1) / 2, z)


def harmonic(n):
    return sum((Fraction(1, i) for i in range(1, n + 1)), Fraction(0))


def alternating_binomial_sum(k):
    """sum_{j=1}^{k} (-2)^j / j * C(k, j) by direct summation."""
    return sum((Fraction((-2) ** j, j) * comb(k, j) for j in range(1, k + 1)), Fraction(0))


def apply_shift(op, seq, n):
    """(op . seq)(n) for a shift operator with rational coefficients."""
    total = Fraction(0)
    for i, c in enumerate(op.coeffs):
        if not c.is_zero():
            total += rf_value(c, {op.var: n} if op.var in c.variables() else {}) * seq[n + i]
    return total


def rf(text):
    return RF.parse(text)


def brute_unroll(op, initials, N):
    """Terms f(0..N) of a recurrence by direct forward substitution."""
    vals = [Fraction(x) for x in initials]
    d = op.order
    while len(vals) <= N:
        m = len(vals) - d
        at = {op.var: m}
        coeffs = [rf_value(c, at) if not c.is_zero() else Fraction(0) for c in op.coeffs]
        vals.append(-sum(c * vals[m + i] for i, c in enumerate(coeffs[:-1])) / coeffs[-1])
    return vals[: N + 1]


def series_from_ode(op, initials, N):
    """Taylor coefficients c_0..c_N at an ordinary point 0 by matching powers."""
    d = op.order
    z = op.var
    expanded = [sympy_poly(c, z) if not c.is_zero() else {} for c in op.coeffs]
    lead0 = expanded[d].get(0, Fraction(0))
    assert lead0 != 0, "0 must be an ordinary point"
    cs = [Fraction(x) for x in initials]
    while len(cs) <= N:
        m = len(cs) - d
        # coefficient of z^m in sum_i a_i(z) f^(i)(z), unknown c_{m+d}
        acc = Fraction(0)
        for i, a in enumerate(expanded):
            for q, aq in a.items():
                idx = m - q + i
                if 0 <= idx < len(cs) and m - q >= 0:
                    acc += aq * _falling(idx, i) * cs[idx]
        cs.append(-acc / (lead0 * _falling(m + d, d)))
    return cs[: N + 1]


def _falling(x, i):
    out = 1
    for j in range(i):
        out *= x - j
    return out


def sympy_poly(c, z):
    """{power: Fraction} for a rational function that is a polynomial in z."""
    import sympy
    expr = sympy.sympify(f"({c.num})/({c.den})".replace("^", "**"))
    p = sympy.Poly(sympy.cancel(expr), sympy.Symbol(z))
    return {m[0]: Fraction(int(v.p), int(v.q)) for m, v in zip(p.monoms(), p.coeffs())}


def ode_residual(op, cs, upto):
    """Coefficients of z^0..z^upto of op applied to sum c_j z^j."""
    expanded = [sympy_poly(c, op.var) if not c.is_zero() else {} for c in op.coeffs]
    out = []
    for m in range(upto + 1):
        acc = Fraction(0)
        for i, a in enumerate(expanded):
            for q, aq in a.items():
                idx = m - q + i
                if m - q >= 0 and idx < len(cs):
                    acc += aq * _falling(idx, i) * cs[idx]
        out.append(acc)
    return out


def theta_operator(parts, z="z"):
    """sum_k z^k p_k(theta) as a derivation operator; parts maps k to the
    coefficients of p_k in ascending powers of theta = z D."""
    from sympy.functions.combinatorial.numbers import stirling

    coeffs = {}
    for k, p in parts.items():
        for i, a in enumerate(p):
            for j in range(i + 1):
                s = int(stirling(i, j)) if i else int(j == 0)
                if s and a:
                    coeffs.setdefault(j, []).append(f"({Fraction(a) * s})*{z}^{k + j}")
    top = max(coeffs)
    return diff_op(z, [" + ".join(coeffs.get(j, ["0"])) for j in range(top + 1)])


def poly_from_roots(roots):
    """Ascending coefficients of prod (x - r)."""
    out = [Fraction(1)]
    for r in roots:
        nxt = [Fraction(0)] * (len(out) + 1)
        for i, c in enumerate(out):
            nxt[i + 1] += c
            nxt[i] -= r * c
        out = nxt
    return out


def poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def random_regular_singular(rng, kind):
    """(operator, expected required monomials) with a regular singular point at 0.

    kinds: "generic" (root differences not integers), "double" (a double root),
    "resonant" (roots r and r + m with the obstruction to a log term removed).
    """
    r = Fraction(rng.randint(-6, 6), rng.choice([1, 2, 3]))
    lower = [Fraction(rng.randint(-3, 3)) for _ in range(2)]
    if kind == "generic":
        s = r + Fraction(rng.choice([1, 2, 5]), rng.choice([3, 4, 7]))
        roots = [r, s]
        p1 = lower
        expected = sorted([(r, 0), (s, 0)])
    elif kind == "double":
        roots = [r, r]
        p1 = lower
        expected = [(r, 0), (r, 1)]
    else:
        m = rng.randint(1, 3)
        roots = [r, r + m]
        p1 = poly_mul(poly_from_roots([r + m - 1]), [lower[0], lower[1] or 1])
        expected = [(r, 0), (r + m, 0)]
    parts = {0: poly_from_roots(roots), 1: p1}
    if rng.random() < 0.5:
        parts[2] = [Fraction(rng.randint(1, 3))]
        if kind == "resonant":
            # keep the offset-m equation solvable: the z^2 part must vanish there too
            parts[2] = poly_mul(poly_from_roots([roots[1] - 2]), parts[2])
    return theta_operator(parts), expected


CLOSURE_N = 24


def random_recurrence(rng, length=CLOSURE_N):
    """Order 1 or 2 with a leading coefficient free of nonnegative integer roots."""
    order = rng.choice([1, 2])
    coeffs = [f"{rng.randint(-3, 3)}*n + {rng.randint(-4, 4)}" for _ in range(order)]
    coeffs.append(f"{rng.choice([1, 2, -1])}*(n + {rng.randint(1, 4)})")
    if all(RF.parse(c).is_zero() for c in coeffs[:-1]):
        coeffs[0] = "1"
    op = shift_op("n", coeffs)
    init = [Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(order)]
    return op, brute_unroll(op, init, length)


def random_ode(rng):
    """Order 1 or 2 with 0 an ordinary point."""
    order = rng.choice([1, 2])
    coeffs = [f"{rng.randint(-3, 3)}*z^2 + {rng.randint(-3, 3)}*z + {rng.randint(-3, 3)}" for _ in range(order)]
    coeffs.append(f"{rng.randint(-2, 2)}*z + {rng.choice([1, 2, 3])}")
    if all(RF.parse(c).is_zero() for c in coeffs[:-1]):
        coeffs[0] = "z"
    op = diff_op("z", coeffs)
    init = [Fraction(rng.randint(-4, 4)) for _ in range(order)]
    return op, series_from_ode(op, init, CLOSURE_N)


def vanishes(op, seq):
    return all(x == 0 for x in apply_to_sequence(op, seq))


N_, K_ = Linear(1, 0, 0), Linear(0, 1, 0)


def binom(top, bottom, e=1):
    return tuple((lin, s * e) for lin, s in binomial_factors(top, bottom))


def term(factorials=(), powers=()):
    return HyperTerm.from_product(HyperProduct(factorials=tuple(factorials), powers=tuple(powers)))


def brute_sums(h, upper, count):
    u, v = upper[1], upper[2]
    return [sum((h.value(n, k) for k in range(0, u * n + v + 1)), CE.const(0)) for n in range(count)]


# every random term carries C(n, k), so the sums over 0..n have natural boundaries
PIECES = [
    lambda: (),
    lambda: binom(N_, K_),
    lambda: binom(Linear(1, 1, 0), K_),
    lambda: binom(Linear(0, 2, 0), K_),
    lambda: binom(Linear(1, 0, 1), K_),
]
BASES = [RF(1), RF(-1), RF(2), RF(-2), RF(Fraction(1, 2))]


def random_binomial_term(rng):
    facts = binom(N_, K_) + rng.choice(PIECES)()
    base = rng.choice(BASES)
    return term(facts, ((base, K_),) if not base.is_one() else ())


def random_gosper_case(rng):
    """(h(k+1)/h(k), h) for h(k) = p(k) c^k (k+a)!/(k+b)! with small random data, or None when p = 0."""
    a, b = rng.randint(0, 3), rng.randint(0, 3)
    c = Fraction(rng.choice([1, -1, 2, 3]), rng.choice([1, 2]))
    p = [rng.randint(-3, 3) for _ in range(rng.randint(1, 3))]

    def h(k):
        return sum(x * k ** i for i, x in enumerate(p)) * c ** k * Fraction(factorial(k + a), factorial(k + b))

    ptext = "+".join(f"({x})*k^{i}" for i, x in enumerate(p)) or "0"
    if RF.parse(ptext).is_zero():
        return None
    ratio = RF.parse(f"({ptext.replace('k', '(k+1)')})/({ptext})*({c})*(k+{a}+1)/(k+{b}+1)")
    return ratio, h

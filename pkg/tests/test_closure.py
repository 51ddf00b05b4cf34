"""Closure operations checked on random instances by unrolling and substituting."""

import random

import pytest

from holoproof.closure import (
    algebraic_compose,
    de2re,
    de_plus,
    de_product,
    re2de,
    re_cauchy,
    re_hadamard,
    re_plus,
    re_section,
    re_shift,
)
from holoproof.arith import RF
from holoproof.ore import OreError, apply_to_sequence, diff_op, normalize, render, shift_op
from oracles import ode_residual, random_ode, random_recurrence, vanishes

N = 24


@pytest.mark.parametrize("seed", range(50))
def test_re_plus(seed):
    rng = random.Random(1000 + seed)
    (a, f), (b, g) = random_recurrence(rng), random_recurrence(rng)
    assert vanishes(re_plus(a, b), [x + y for x, y in zip(f, g)])


@pytest.mark.parametrize("seed", range(50))
def test_re_hadamard(seed):
    rng = random.Random(2000 + seed)
    (a, f), (b, g) = random_recurrence(rng), random_recurrence(rng)
    assert vanishes(re_hadamard(a, b), [x * y for x, y in zip(f, g)])


@pytest.mark.parametrize("seed", range(30))
def test_re_cauchy(seed):
    rng = random.Random(3000 + seed)
    (a, _), (b, _) = random_recurrence(rng), random_recurrence(rng)
    op = re_cauchy(a, b)
    # the convolution recurrence may have large order; unroll far enough to test it
    rng = random.Random(3000 + seed)
    (a, f), (b, g) = random_recurrence(rng, op.order + 10), random_recurrence(rng, op.order + 10)
    conv = [sum(f[i] * g[m - i] for i in range(m + 1)) for m in range(len(f))]
    assert vanishes(op, conv)


@pytest.mark.parametrize("seed", range(20))
def test_re_shift(seed):
    rng = random.Random(4000 + seed)
    a, f = random_recurrence(rng)
    j = rng.randint(1, 3)
    assert vanishes(re_shift(a, j), f[j:])


@pytest.mark.parametrize("seed", range(20))
def test_re_section(seed):
    rng = random.Random(5000 + seed)
    a, f = random_recurrence(rng)
    m = rng.choice([2, 3])
    r = rng.randrange(m)
    assert vanishes(re_section(a, m, r), f[r::m])


@pytest.mark.parametrize("seed", range(20))
def test_re2de(seed):
    rng = random.Random(6000 + seed)
    a, f = random_recurrence(rng)
    L = re2de(a, "z")
    assert all(x == 0 for x in ode_residual(L, f, N - L.order - 1))


@pytest.mark.parametrize("seed", range(20))
def test_de2re(seed):
    rng = random.Random(7000 + seed)
    L, cs = random_ode(rng)
    A, start = de2re(L, "n", return_start=True)
    assert all(x == 0 for x in apply_to_sequence(A, cs)[start:])


@pytest.mark.parametrize("seed", range(25))
def test_de_plus(seed):
    rng = random.Random(8000 + seed)
    (a, f), (b, g) = random_ode(rng), random_ode(rng)
    L = de_plus(a, b)
    assert all(x == 0 for x in ode_residual(L, [x + y for x, y in zip(f, g)], N - L.order - 1))


@pytest.mark.parametrize("seed", range(25))
def test_de_product(seed):
    rng = random.Random(9000 + seed)
    (a, f), (b, g) = random_ode(rng), random_ode(rng)
    prod = [sum(f[i] * g[m - i] for i in range(m + 1)) for m in range(N + 1)]
    L = de_product(a, b)
    assert all(x == 0 for x in ode_residual(L, prod, N - L.order - 1))


def test_algebraic_compose_matches_gf_route():
    sin_op = diff_op("g", [1, 0, 1])
    direct = algebraic_compose(sin_op, RF.parse("g^2 - z^2 - 2*z*t"), "t")
    assert render(normalize(direct)) == "z*D^0 + D^1 + (z+2*t)*D^2"


def test_algebraic_compose_rejects_degenerate_relation():
    with pytest.raises(OreError) as err:
        algebraic_compose(diff_op("g", [1, 0, 1]), RF.parse("(g - t)^2"), "t")
    assert err.value.code == "degenerate-algebraic-relation"


def test_mixed_kinds_rejected():
    with pytest.raises(OreError):
        re_plus(shift_op("n", [1, 1]), diff_op("n", [1, 1]))

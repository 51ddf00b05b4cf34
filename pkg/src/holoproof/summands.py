"""Summand systems h(n,k) f(k) read off ``sum(k, lo, hi, term)`` expressions.

Factorials, binomials and powers with exponents linear in the indices go into
the hypergeometric part; spherical Bessel functions and Legendre polynomials
with index linear in k form the module part.  The module is replaced by the
cyclic submodule generated by f(k) when that submodule is proper and closed
under the parameter derivation, so certificates come out in the basis f(k),
f(k+1), ...; otherwise the tensor basis is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import RF
from .constants import CE, ONE, ConstantExpr
from .dsl import Bin, Call, Name, Node, node_rational
from .evaluate import EvalError, _factors, closed, family_of, free_names, substitute, to_linear, to_rf
from .hyper import HyperProduct, HyperTerm, Linear, binomial_factors
from .linalg import solve
from .ore import DIFF, SHIFT, FiniteModule, companion, unit_vector
from .telescoping import DIFFERENTIAL, RECURRENCE, SummandSystem, kron_matrices, leibniz_matrices

KV = "k"
NV = "n"


@dataclass
class SumSpec:
    system: SummandSystem
    term: Node                  # summand with the index renamed to k
    lower: int
    upper: object               # ("affine", u, v) or "inf"
    families: list = field(default_factory=list)
    reduced: bool = False

    def summand(self, k: int, n: int | None = None) -> ConstantExpr:
        env = {KV: k}
        if n is not None:
            env[NV] = n
        return closed(self.term, env)

    def finite_sum(self, n: int) -> ConstantExpr:
        if self.upper == "inf":
            raise EvalError("infinite-sum", "no finite evaluation")
        _, u, v = self.upper
        total = CE.const(0)
        for k in range(self.lower, u * n + v + 1):
            total = total + self.summand(k, n)
        return total


def _expand_powers(factors):
    out = []
    for f, e in factors:
        p = node_rational(f.right) if isinstance(f, Bin) and f.op == "^" else None
        if p is not None and p.denominator == 1 and p > 0 and to_rf(f) is None:
            out += _expand_powers([(f.left, e)] * int(p))
        else:
            out.append((f, e))
    return out


def _hyper_part(factors):
    factors = _expand_powers(factors)
    const = Fraction(1)
    facts, powers = [], []
    extra = RF(1)
    fams = []
    for f, e in factors:
        q = node_rational(f)
        if q is not None:
            const = const * q if e > 0 else const / q
            continue
        if isinstance(f, Call) and f.func == "fact":
            lin = to_linear(f.args[0], NV, KV)
            if lin is None:
                raise EvalError("not-hypergeometric", "factorial argument must be linear in n and k", f)
            facts.append((lin, e))
            continue
        if isinstance(f, Call) and f.func == "binomial":
            top, bot = (to_linear(a, NV, KV) for a in f.args)
            if top is None or bot is None:
                raise EvalError("not-hypergeometric", "binomial arguments must be linear", f)
            facts += [(lin, s * e) for lin, s in binomial_factors(top, bot)]
            continue
        if isinstance(f, Bin) and f.op == "^":
            if not free_names(f.left) & {NV, KV} and free_names(f.right) & {NV, KV}:
                lin = to_linear(f.right, NV, KV)
                base = to_rf(f.left)
                if lin is None or base is None:
                    raise EvalError("not-hypergeometric", "power must have a linear exponent", f)
                if e < 0:
                    lin = Linear(-lin.a, -lin.b, -lin.c)
                powers.append((base, lin))
                continue
        fam = family_of(f, KV)
        if fam is not None:
            if e < 0:
                raise EvalError("not-holonomic", "special function in a denominator", f)
            fams.append(fam)
            continue
        r = to_rf(f)
        if r is None:
            raise EvalError("not-holonomic", "unsupported summand factor", f)
        extra = extra * r if e > 0 else extra / r
    return HyperProduct(NV, KV, const, tuple(facts), tuple(powers), extra), fams


def _tensor_system(fams: list):
    """Shift and derivation matrices on the tensor product of the family modules."""
    kmat = fams[0].shift_matrix()
    zmat = fams[0].z_matrix()
    dim = 2
    for fam in fams[1:]:
        zm = fam.z_matrix()
        if zmat is None and zm is None:
            znew = None
        else:
            znew = leibniz_matrices(zmat, zm, dim, 2)
        kmat = kron_matrices(kmat, fam.shift_matrix())
        zmat = znew
        dim *= 2
    if zmat is None:
        zmat = [[RF(0)] * dim for _ in range(dim)]
    return kmat, zmat


def _tensor_values(fams: list, k0: int):
    vals = [ONE]
    for fam in fams:
        fv = fam.values(k0)
        vals = [a * b for a in vals for b in fv]
    return vals


def _cyclic_reduction(kmat, zmat):
    """(new kmat, new zmat) in the basis f(k+i), or None if D_z leaves the span."""
    kmod = FiniteModule(SHIFT, KV, kmat)
    ann = kmod.annihilator(unit_vector(len(kmat), 0))
    r = ann.order
    if r == len(kmat):
        return None
    basis = []
    v = unit_vector(len(kmat), 0)
    for _ in range(r):
        basis.append(v)
        v = kmod.act(v)
    zmod = FiniteModule(DIFF, "z", zmat)
    new_z = []
    for b in basis:
        coords = solve(basis, zmod.act(b))
        if coords is None:
            return None
        new_z.append(coords)
    return companion(ann).matrix, new_z


def build_sum(node: Node, outer: str) -> SumSpec:
    """``node`` is sum(idx, lo, hi, term); ``outer`` is n (recurrences) or z."""
    if not isinstance(node, Call) or node.func != "sum":
        raise EvalError("bad-sum", "expected sum(index, lower, upper, term)", node)
    idx, lo, hi, term = node.args
    if idx.id != KV:
        if KV in free_names(term):
            raise EvalError("bad-sum", "summand already uses k", node)
        term = substitute(term, {idx.id: Name(KV, idx.loc)})
    lower = node_rational(lo)
    if lower is None or lower.denominator != 1:
        raise EvalError("bad-sum", "lower bound must be an integer", lo)
    if isinstance(hi, Name) and hi.id == "inf":
        upper = "inf"
    else:
        lin = to_linear(hi, NV, KV)
        if lin is None or lin.b:
            raise EvalError("bad-sum", "upper bound must be inf or linear in n", hi)
        upper = ("affine", lin.a, lin.c)
    if outer == NV and upper == "inf":
        raise EvalError("bad-sum", "recurrence mode needs a finite upper bound", hi)
    hp, fams = _hyper_part(_factors(term))
    h = HyperTerm.from_product(hp)
    mode = RECURRENCE if outer == NV else DIFFERENTIAL
    reduced = False
    if not fams:
        kmat, zmat = [[RF(1)]], [[RF(0)]]

        def values(k0):
            return [ONE]
    else:
        kmat, zmat = _tensor_system(fams)
        red = _cyclic_reduction(kmat, zmat)
        if red is not None:
            kmat, zmat = red
            reduced = True

            def values(k0, fams=fams, d=len(kmat)):
                out = []
                for i in range(d):
                    val = ONE
                    for fam in fams:
                        val = val * fam.value(k0 + i)
                    out.append(val)
                return out
        else:
            def values(k0, fams=fams):
                return _tensor_values(fams, k0)
    labels = [f"f(k+{i})" if i else "f(k)" for i in range(len(kmat))]
    sys = SummandSystem(h, kmat, mode, zmat=zmat if mode == DIFFERENTIAL else None, zvar="z",
                        labels=labels, basis_values=values)
    return SumSpec(sys, term, int(lower), upper, fams, reduced)

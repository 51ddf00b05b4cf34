"""The five proof strategies.

Each strategy turns one identity block into a :class:`ProofReport`.  A
report is PROVED only when every certificate verifies and every zero test
passes; vanishing-boundary assumptions made while summing certificates turn
PROVED into ASSUMPTION_GATED.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..arith import RF, poly_degree, render_ratfun_factored
from ..constants import ZERO, ConstantExpr
from ..dsl import Bin, Call, Identity, ListNode, Name, Node, Str, node_rational, print_expr
from ..evaluate import (EvalError, _factors, annihilator_of_closed, closed, free_names, function,
                        image_annihilator, sequence, to_rf)
from ..frobenius import IRREGULAR_SINGULAR, classify_point, leading_integer_roots, re_initial_count
from ..hyper import HyperError
from ..linalg import first_dependency
from ..ore import SHIFT, OreOperator, equivalent, lclm, normalize, primitive, render
from ..relations import InhomogeneousRelation
from ..series import SymbolicSeries, expand_constexpr, series_apply
from ..summands import NV, SumSpec, _hyper_part, build_sum
from ..telescoping import (TelescopingCertificate, TelescopingError, ct_holonomic, sum_with_boundaries,
                           verify_certificate)
from .report import ProofReport


class SpecError(ValueError):
    """A field is missing or has the wrong shape for the chosen strategy."""

    def __init__(self, ident: str, message: str):
        super().__init__(f"{ident}: {message}")
        self.code = "bad-spec"


@dataclass
class Options:
    order: int = 30
    max_ct_order: int = 4
    check_certificates: bool = False


@dataclass
class Context:
    options: Options = field(default_factory=Options)
    resolve: object = None          # id -> ProofReport, proving on demand
    lookup: object = None           # id -> Identity


# ---------------------------------------------------------------------------
# field access

def _need(ident: Identity, key: str) -> Node:
    node = ident.get(key)
    if node is None:
        raise SpecError(ident.name, f"strategy {_strategy(ident)} needs a '{key}' field")
    return node


def _strategy(ident: Identity) -> str:
    s = ident.get("strategy")
    return s.id if isinstance(s, Name) else "?"


def _var(ident: Identity, key: str, default: str) -> str:
    node = ident.get(key)
    if node is None:
        return default
    if not isinstance(node, Name):
        raise SpecError(ident.name, f"'{key}' must be a variable name")
    return node.id


def _int(ident: Identity, key: str, default: int) -> int:
    node = ident.get(key)
    if node is None:
        return default
    q = node_rational(node)
    if q is None or q.denominator != 1:
        raise SpecError(ident.name, f"'{key}' must be an integer")
    return int(q)


def _text(ident: Identity, key: str) -> list:
    node = ident.get(key)
    if node is None:
        return []
    items = node.items if isinstance(node, ListNode) else (node,)
    return [x.value if isinstance(x, Str) else print_expr(x) for x in items]


def _is_sum(node: Node) -> bool:
    return isinstance(node, Call) and node.func == "sum"


def _new_report(ident: Identity) -> ProofReport:
    title = ident.get("title")
    rep = ProofReport(ident.name, _strategy(ident), title.value if isinstance(title, Str) else "")
    rep.annotations += [f"domain: {d}" for d in _text(ident, "domain")]
    rep.annotations += _text(ident, "note")
    rep.assumptions += _text(ident, "assume")
    return rep


def _exponent_map(ident: Identity, index: str):
    """The exponent a*n + b attached to the n-th coefficient."""
    node = ident.get("exponent")
    if node is None:
        return lambda n: n
    r = to_rf(node)
    if r is None or not r.is_polynomial() or r.variables() - {index} or poly_degree(r.num, index) > 1:
        raise SpecError(ident.name, "exponent must be linear in the index")
    b = r.compose({index: 0}).constant_value()
    a = r.compose({index: 1}).constant_value() - b
    if a <= 0 or a.denominator != 1 or b.denominator != 1:
        raise SpecError(ident.name, "exponent must be a*n+b with a positive integer a")
    return lambda n: int(a) * n + int(b)


def _first_bad(series: SymbolicSeries, upto, v: str):
    """First nonzero slot with exponent <= upto as a witness string."""
    hit = series.first_nonzero()
    if hit is None or hit[0] > upto:
        return None
    e, lp, c = hit
    mono = f"{v}^{e}" + (f"*log({v})" if lp else "")
    return f"coefficient of {mono} is {c}"


# ---------------------------------------------------------------------------
# de_compare

def prove_de_compare(ident: Identity, ctx: Context) -> ProofReport:
    rep = _new_report(ident)
    v = _var(ident, "var", "z")
    lhs, rhs = _need(ident, "lhs"), _need(ident, "rhs")
    top = ctx.options.order
    if lhs == rhs:
        rep.operators.append("difference: 0")
        rep.check("both sides are the same expression", True)
        return rep
    L, R = function(lhs, v), function(rhs, v)
    A, B = normalize(L.annihilator()), normalize(R.annihilator())
    rep.operators += [f"lhs: {render(A)}", f"rhs: {render(B)}"]
    same = equivalent(A, B)
    M = A if same else normalize(lclm(A, B))
    rep.operators.append(f"difference: {render(M)}")
    rep.annotations.append("both sides have the same annihilator" if same
                           else "difference annihilated by the lclm of both sides")
    local = classify_point(M, 0)
    rep.annotations.append(f"{v} = 0 is {local.point_class.replace('_', ' ')}")
    if local.point_class == IRREGULAR_SINGULAR:
        rep.check("local data at 0", False, "irregular singular point")
        return rep
    required = local.required_monomials
    need = max([int(e) + 1 for e, _ in required] + [top])
    diff = L.series(need) - R.series(need)
    rep.initials_required = len(required)
    checked = 0
    for e, lp in required:
        c = diff.coeff(e, lp)
        if not c.is_zero():
            mono = f"{v}^{e}" + (f"*log({v})" if lp else "")
            rep.check("required initial coefficients vanish", False, witness=f"coefficient of {mono} is {c}")
            break
        checked += 1
    else:
        rep.check("required initial coefficients vanish", True,
                  ", ".join(f"{v}^{e}" + ("*log" if lp else "") for e, lp in required))
    rep.initials_checked = checked
    bad = _first_bad(diff, need, v)
    rep.check(f"lhs - rhs vanishes through {v}^{need}", bad is None, witness=bad)
    return rep


# ---------------------------------------------------------------------------
# re_coefficients

def prove_re_coefficients(ident: Identity, ctx: Context) -> ProofReport:
    rep = _new_report(ident)
    v = _var(ident, "var", "z")
    idx = _var(ident, "index", "n")
    lhs, rhs = _need(ident, "lhs"), _need(ident, "rhs")
    mult = ident.get("multiplier")
    recipe = _need(ident, "coefficients")
    expo = _exponent_map(ident, idx)
    min_checks = _int(ident, "min_checks", 0)

    seq = sequence(recipe, idx)
    op = normalize(seq.op)
    roots = leading_integer_roots(op)
    rep.operators.append(f"coefficients: {render(op)}")
    rep.annotations.append(f"recurrence of order {op.order}, holds for {idx} >= {seq.start}")
    rep.annotations.append("leading coefficient has no nonnegative integer roots" if not roots
                           else f"leading coefficient vanishes at {idx} = {roots}")
    required = seq.start + re_initial_count(op)
    count = max(required, min_checks)
    rep.initials_required = required

    # the expression itself, expanded directly
    body = Bin("-", lhs, rhs)
    if mult is not None:
        body = Bin("*", mult, body)
    top = max(ctx.options.order, expo(count - 1))
    direct = function(body, v).series(top)
    last = expo(count - 1)
    bad = _first_bad(direct, last, v)
    rep.check(f"coefficients of {v}^{expo(0)}..{v}^{last} vanish", bad is None, witness=bad)

    terms = seq.terms(count + op.order + 2)
    nonzero = next((i for i in range(count) if not terms[i].is_zero()), None)
    rep.initials_checked = count if nonzero is None else nonzero
    rep.check(f"recipe coefficients c_0..c_{count - 1} vanish", nonzero is None,
              witness=None if nonzero is None else f"c_{nonzero} = {terms[nonzero]}")
    from ..ore import apply_to_sequence
    resid = apply_to_sequence(op, terms[seq.start:], start=seq.start)
    rep.check("recipe terms satisfy the recurrence", all(r.is_zero() for r in resid))

    # the recipe describes the expression
    mismatch = None
    n = 0
    expected = {}
    while expo(n) <= top:
        expected[expo(n)] = seq.term(n)
        n += 1
    for i in range(direct.order + 1):
        e = direct.alpha + i
        want = expected.get(e, ZERO) if e.denominator == 1 else ZERO
        if not (direct.c0[i] - want).is_zero() or not direct.c1[i].is_zero():
            mismatch = f"coefficient of {v}^{e}: expansion {direct.c0[i]}, recipe {want}"
            break
    rep.check(f"recipe matches the expansion through {v}^{top}", mismatch is None, witness=mismatch)
    return rep


# ---------------------------------------------------------------------------
# telescoping

def _shift_annihilator(e: ConstantExpr, nv: str) -> OreOperator:
    keys, vecs = [], []
    shifts = [e.map_coeffs(lambda c, i=i: c.shift(nv, i)) for i in range(8)]
    for s in shifts:
        for m in s.terms:
            if m not in keys:
                keys.append(m)
    vecs = [[s.terms.get(k, RF(0)) for k in keys] for s in shifts]
    found = first_dependency(iter(vecs), len(vecs))
    if found is None:
        raise EvalError("no-annihilator", "right side is not P-recursive of small order")
    _, c = found
    return primitive(OreOperator(SHIFT, nv, [-x for x in c] + [RF(1)]))


def _telescope_sum(rep: ProofReport, sum_node: Node, outer: str, ctx: Context, label: str = "sum"):
    spec = build_sum(sum_node, outer)
    try:
        cert = ct_holonomic(spec.system, max_order=ctx.options.max_ct_order)
    except TelescopingError as exc:
        rep.check("telescoper found", False, str(exc))
        return None, None
    ok = verify_certificate(cert, spec.system)
    rep.certificates.append(cert.render())
    rep.check(f"certificate verified ({label})", ok)
    notes: list = []
    rel = sum_with_boundaries(cert, spec.system, spec.lower, spec.upper, assumptions=notes)
    for a in notes:
        if a not in rep.assumptions:
            rep.assumptions.append(a)
    rep.operators.append(f"{label}: {rel.render()}")
    return spec, rel


def stored_certificate(ident: Identity, system) -> TelescopingCertificate | None:
    """The telescoper and certificate written in a spec file, rescaled from the
    file's prefactor to the summand of ``system``."""
    tel, cert, pre = ident.get("telescoper"), ident.get("certificate"), ident.get("cert_prefactor")
    if tel is None or cert is None:
        return None
    if not isinstance(tel, ListNode) or not isinstance(cert, ListNode):
        raise SpecError(ident.name, "telescoper and certificate must be lists")
    rel = RF(1)
    if pre is not None:
        hp, fams = _hyper_part(_factors(pre))
        if fams:
            raise SpecError(ident.name, "certificate prefactor must be hypergeometric")
        try:
            rel = hp.quotient(system.h.product)
        except HyperError as exc:
            raise SpecError(ident.name, f"certificate prefactor: {exc}") from None
    cs = [to_rf(x) for x in tel.items]
    gs = [to_rf(x) for x in cert.items]
    if any(x is None for x in cs + gs):
        raise SpecError(ident.name, "stored certificate entries must be rational")
    return TelescopingCertificate(cs, [g * rel for g in gs], system.mode, system.param_var)


def _stored_certificate(rep: ProofReport, ident: Identity, spec: SumSpec):
    stored = stored_certificate(ident, spec.system)
    if stored is None:
        rep.annotations.append("no stored certificate")
        return
    gs = [to_rf(x) for x in ident.get("certificate").items]
    ok = verify_certificate(stored, spec.system)
    rep.certificates.append("stored: [" + ", ".join(render_ratfun_factored(g) for g in gs) + "] "
                            + ("verified" if ok else "rejected"))
    rep.check("stored certificate verified", ok)


def _check_recurrence_side(rep: ProofReport, spec: SumSpec, rel: InhomogeneousRelation,
                           closed_node: Node, label: str = ""):
    """The closed side satisfies the relation and agrees with the sum initially."""
    tag = f" ({label})" if label else ""
    P = rel.op
    seq = sequence(closed_node, NV)
    img = image_annihilator(P, seq.op)
    ops = [x for x in (img, None if rel.rhs.is_zero() else _shift_annihilator(rel.rhs, NV)) if x is not None]
    if ops:
        M = ops[0] if len(ops) == 1 else lclm(ops[0], ops[1])
        need = seq.start + re_initial_count(M)
        vals = [seq.term(i) for i in range(need + P.order)]
        resid = rel.residual(vals, 0)[:need]
        bad = next((i for i, r in enumerate(resid) if not r.is_zero()), None)
        rep.check(f"closed side satisfies the relation{tag}", bad is None,
                  f"checked {need} values",
                  witness=None if bad is None else f"residual at {NV} = {bad} is {resid[bad]}")
    else:
        rep.check(f"closed side satisfies the relation{tag}", True, "annihilator image is zero")
    count = re_initial_count(P)
    rep.initials_required += count
    done = 0
    for i in range(count):
        lhs, rhs = spec.finite_sum(i), seq.term(i)
        if not (lhs - rhs).is_zero():
            rep.check(f"initial values agree{tag}", False,
                      witness=f"{NV} = {i}: sum {lhs}, closed side {rhs}")
            break
        done += 1
    else:
        rep.check(f"initial values agree{tag}", True, f"{NV} = 0..{count - 1}")
    rep.initials_checked += done


def _sum_series(spec: SumSpec, top: int, v: str) -> SymbolicSeries:
    for fam in spec.families:
        if fam.kind not in ("sphj", "sphi", "legendre"):
            raise EvalError("unsupported-expansion", f"{fam.kind} terms have no power series at 0")
    for f, _ in _factors(spec.term):
        if v in free_names(f) and not (isinstance(f, Call) and f.func in ("sphj", "sphi")) \
                and not (isinstance(f, Bin) and f.op == "^" and isinstance(f.left, Call)):
            raise EvalError("unsupported-expansion", "summand prefactor depends on the variable")
    slope = sum(f.lin.a for f in spec.families if f.kind != "legendre")
    if slope <= 0:
        raise EvalError("unsupported-expansion", "summand valuations do not grow with k")
    total = None
    k = spec.lower
    while True:
        val = sum(f.lin.a * k + f.lin.c for f in spec.families if f.kind != "legendre")
        if val > top:
            break
        s = expand_constexpr(spec.summand(k), v, top)
        total = s if total is None else total + s
        k += 1
    if total is None:
        return SymbolicSeries(v, 0, [ZERO] * (top + 1))
    return total


def _check_function_side(rep: ProofReport, spec: SumSpec, rel: InhomogeneousRelation,
                         closed_node: Node, ctx: Context):
    v = rel.op.var
    P = rel.op
    top = ctx.options.order
    f = function(closed_node, v)
    Q = normalize(f.annihilator())
    rep.operators.append(f"closed side: {render(Q)}")
    img = image_annihilator(P, Q)
    parts = [x for x in (img, None if rel.rhs.is_zero() else annihilator_of_closed(rel.rhs, v)) if x]
    if parts:
        M = parts[0] if len(parts) == 1 else lclm(parts[0], parts[1])
        local = classify_point(M, 0)
        if local.point_class == IRREGULAR_SINGULAR:
            rep.check("closed side satisfies the relation", False, "irregular singular point at 0")
            return
        need = max([int(e) + 1 for e, _ in local.required_monomials] + [top])
        fs = f.series(need + P.order + 1)
        T = series_apply(P, fs)
        if not rel.rhs.is_zero():
            T = T - expand_constexpr(rel.rhs, v, need + 1)
        T = T.truncate(min(T.top, need))
        bad = _first_bad(T, need, v)
        rep.check("closed side satisfies the relation", bad is None,
                  f"{len(local.required_monomials)} required coefficients, series through {v}^{int(T.top)}",
                  witness=bad)
    else:
        rep.check("closed side satisfies the relation", True, "annihilator image is zero")

    local = classify_point(P, 0)
    ind = local.indicial
    rep.annotations.append(f"indicial polynomial of the sum relation at 0: {ind}")
    if local.point_class == IRREGULAR_SINGULAR:
        rep.check("uniqueness at 0", False, "irregular singular point")
        return
    required = local.required_monomials
    need = max([int(e) + 1 for e, _ in required] + [top])
    S = _sum_series(spec, need, v)
    F = f.series(need)
    rep.initials_required += len(required)
    done = 0
    for e, lp in required:
        a, b = S.coeff(e, lp), F.coeff(e, lp)
        if not (a - b).is_zero():
            rep.check("required initial coefficients agree", False,
                      witness=f"coefficient of {v}^{e}: sum {a}, closed side {b}")
            break
        done += 1
    else:
        rep.check("required initial coefficients agree", True,
                  ", ".join(f"{v}^{e}" + ("*log" if lp else "") for e, lp in required))
    rep.initials_checked += done
    bad = _first_bad(S - F, need, v)
    rep.check(f"sum and closed side agree through {v}^{need}", bad is None, witness=bad)


def prove_telescope(ident: Identity, ctx: Context, outer: str) -> ProofReport:
    rep = _new_report(ident)
    lhs, rhs = _need(ident, "lhs"), _need(ident, "rhs")
    if _is_sum(lhs) == _is_sum(rhs):
        raise SpecError(ident.name, "exactly one side must be a sum")
    sum_node, closed_node = (lhs, rhs) if _is_sum(lhs) else (rhs, lhs)
    spec, rel = _telescope_sum(rep, sum_node, outer, ctx)
    if spec is None:
        return rep
    if ctx.options.check_certificates:
        _stored_certificate(rep, ident, spec)
    if outer == NV:
        _check_recurrence_side(rep, spec, rel, closed_node)
    else:
        _check_function_side(rep, spec, rel, closed_node, ctx)
    return rep


def prove_telescope_re(ident: Identity, ctx: Context) -> ProofReport:
    return prove_telescope(ident, ctx, NV)


def prove_telescope_de(ident: Identity, ctx: Context) -> ProofReport:
    return prove_telescope(ident, ctx, _var(ident, "var", "z"))


# ---------------------------------------------------------------------------
# coefficient comparison

def _cases(ident: Identity) -> list:
    node = _need(ident, "cases")
    if not isinstance(node, ListNode) or not all(isinstance(c, ListNode) and len(c.items) == 2
                                                 for c in node.items):
        raise SpecError(ident.name, "cases must be a list of [sum, closed] pairs")
    return [tuple(c.items) for c in node.items]


def _template_series(ident: Identity, coeff: Node, v: str, idx: str, top: int) -> SymbolicSeries:
    expo = _exponent_map(ident, idx)
    weight = ident.get("weight")
    term = coeff if weight is None else Bin("*", weight, coeff)
    vals = [ZERO] * (top + 1)
    n = 0
    while expo(n) <= top:
        vals[expo(n)] = closed(term, {idx: n})
        n += 1
    inner = SymbolicSeries(v, 0, vals)
    log_part = ident.get("log_part")
    pre = _need(ident, "prefactor")
    pf = function(pre, v).series(top)
    shift = pf.alpha
    if log_part is not None:
        inner = inner + function(log_part, v).series(top)
    out = pf * inner
    return out.truncate(min(out.top, top + shift))


def prove_coefficient_compare(ident: Identity, ctx: Context) -> ProofReport:
    rep = _new_report(ident)
    if ident.get("cases") is not None:
        for i, (s, c) in enumerate(_cases(ident)):
            if not _is_sum(s):
                raise SpecError(ident.name, f"case {i + 1} must start with a sum")
            spec, rel = _telescope_sum(rep, s, NV, ctx, label=f"case {i + 1}")
            if spec is None:
                return rep
            _check_recurrence_side(rep, spec, rel, c, label=f"case {i + 1}")
        return rep

    v = _var(ident, "var", "z")
    idx = _var(ident, "index", "n")
    top = ctx.options.order
    lhs, rhs = _need(ident, "lhs"), _need(ident, "rhs")
    L, R = function(lhs, v).series(top), function(rhs, v).series(top)
    D = L - R
    bad = _first_bad(D, D.top, v)
    rep.check(f"coefficients agree through {v}^{D.top}", bad is None, f"{D.order + 1} coefficients", witness=bad)

    lemma = ident.get("lemma")
    if lemma is not None:
        lc, rc = _need(ident, "lhs_coeff"), _need(ident, "rhs_coeff")
        for side, series, coeff in (("lhs", L, lc), ("rhs", R, rc)):
            T = _template_series(ident, coeff, v, idx, top)
            cut = min(T.top, series.top)
            diff = series.truncate(cut) - T.truncate(cut)
            bad = _first_bad(diff, cut, v)
            rep.check(f"{side} has the stated expansion through {v}^{cut}", bad is None, witness=bad)
        name = lemma.value if isinstance(lemma, Str) else print_expr(lemma)
        dep = _dependency(rep, ctx, name)
        if dep is not None:
            rep.initials_required, rep.initials_checked = dep.initials_required, dep.initials_checked
        target = ctx.lookup(name) if ctx.lookup else None
        pairs = _cases(target) if target is not None and target.get("cases") is not None else []
        match = any((a, b) in ((lc, rc), (rc, lc)) for a, b in pairs)
        rep.check(f"coefficient identity is a case of {name}", match)
    for name in _text(ident, "uses"):
        _dependency(rep, ctx, name)
    return rep


def _dependency(rep: ProofReport, ctx: Context, name: str):
    dep = ctx.resolve(name) if ctx.resolve else None
    if dep is None:
        rep.check(f"{name} proved", False, "not found")
        return None
    rep.check(f"{name} proved", dep.ok, dep.verdict)
    for a in dep.assumptions:
        if a not in rep.assumptions:
            rep.assumptions.append(a)
    return dep


STRATEGIES = {
    "de_compare": prove_de_compare,
    "re_coefficients": prove_re_coefficients,
    "telescope_re": prove_telescope_re,
    "telescope_de": prove_telescope_de,
    "coefficient_compare": prove_coefficient_compare,
}

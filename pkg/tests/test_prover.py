import json
from dataclasses import replace

import pytest

from holoproof.dsl import parse
from holoproof.prover import ASSUMPTION_GATED, FAILED, PROVED, Options, Prover, SpecError, document, load_corpus, mutate

GATED = {"10.1.48", "10.1.52"}
BOUNDARY = "boundary term G(k) vanishes as k -> infinity"


@pytest.fixture(scope="module")
def corpus():
    return load_corpus()


@pytest.fixture(scope="module")
def reports(corpus):
    return Prover(corpus).prove_all()


def test_every_entry_proves(reports):
    assert len(reports) == 15
    for r in reports:
        assert r.verdict == (ASSUMPTION_GATED if r.id in GATED else PROVED), r.to_text(verbose=True)
        assert r.initials_checked >= r.initials_required


def test_only_the_boundary_assumption_is_used(reports):
    for r in reports:
        assert r.assumptions == ([BOUNDARY] if r.id in GATED else [])


def test_reports_are_sorted_numerically(reports):
    ids = [r.id for r in reports]
    assert ids[:3] == ["10.1.39", "10.1.40", "10.1.41"] and ids[-1] == "lemma-1"


def _with(corpus, ident):
    return replace(corpus, identities=tuple(ident if x.name == ident.name else x for x in corpus.identities))


@pytest.mark.parametrize("name", [i.name for i in load_corpus().identities])
def test_mutation_fails_with_witness(corpus, name):
    bad = mutate(corpus.find(name))
    rep = Prover(_with(corpus, bad)).prove(bad)
    assert rep.verdict == FAILED
    assert rep.witness


def test_mutation_requires_registration(corpus):
    ident = corpus.find("10.1.39")
    bare = replace(ident, fields=tuple((k, v) for k, v in ident.fields if k != "mutation"))
    with pytest.raises(SpecError):
        mutate(bare)


def test_json_is_deterministic(corpus):
    def dump():
        return json.dumps(document(Prover(corpus).prove_all(), 30), indent=2, sort_keys=True)
    assert dump() == dump()


def test_verdicts_stable_at_higher_order(corpus, reports):
    high = Prover(corpus, Options(order=40)).prove_all()
    assert [(r.id, r.verdict) for r in high] == [(r.id, r.verdict) for r in reports]


def test_missing_strategy_is_a_spec_error():
    doc = parse('identity "x" { lhs: 1; rhs: 1; }\n')
    with pytest.raises(SpecError):
        Prover(doc).prove(doc.identities[0])

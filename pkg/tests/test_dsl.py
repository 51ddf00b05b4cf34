import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoproof.dsl import (
    Bin,
    Call,
    DslError,
    Name,
    Neg,
    Num,
    parse,
    parse_expr,
    print_document,
    print_expr,
)
from holoproof.prover import CORPUS_DIR, load_corpus

CORPUS_FILES = sorted(CORPUS_DIR.glob("*.hid"))


def one(body):
    return 'identity "x" {\n  ' + body + "\n}\n"


def test_missing_comma_reports_position():
    with pytest.raises(DslError) as err:
        parse(one("lhs: sum(k 0, n, k);"))
    e = err.value
    assert e.code == "syntax-error"
    assert (e.line, e.col) == (2, 14)
    assert "expected ',' or ')' but found '0'" in str(e)


def test_unknown_function_suggestion():
    with pytest.raises(DslError) as err:
        parse(one("lhs: sphjj(1, z);"))
    assert err.value.code == "unknown-identifier"
    assert "did you mean 'sphj'?" in str(err.value)


def test_unknown_variable_and_field():
    with pytest.raises(DslError) as err:
        parse(one("lhs: q + 1;"))
    assert err.value.code == "unknown-identifier"
    with pytest.raises(DslError) as err:
        parse(one("stratgy: de_compare;"))
    assert "did you mean 'strategy'?" in str(err.value)


def test_arity_checked():
    with pytest.raises(DslError) as err:
        parse(one("lhs: sphj(1);"))
    assert "sphj takes 2 arguments, got 1" in str(err.value)


def test_summation_index_is_bound_only_inside():
    parse(one("lhs: sum(q, 0, n, q^2);"))
    with pytest.raises(DslError):
        parse(one("lhs: sum(q, 0, n, 1) + q;"))


def test_comments_and_strings():
    doc = parse('# leading comment\nidentity "a.b" { title: "x y"; lhs: 1; } # trailing\n')
    assert doc.identities[0].name == "a.b"
    assert doc.identities[0].get("title").value == "x y"


def test_corpus_has_fifteen_entries():
    doc = load_corpus()
    assert len(doc.identities) == 15
    assert len(CORPUS_FILES) == 15


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    doc = parse(path.read_text(encoding="utf-8"), source=path.name)
    text = print_document(doc)
    again = parse(text)
    assert again == doc
    assert print_document(again) == text


def test_duplicate_identity_rejected(tmp_path):
    (tmp_path / "a.hid").write_text(one("lhs: 1;"))
    (tmp_path / "b.hid").write_text(one("lhs: 2;"))
    with pytest.raises(DslError) as err:
        load_corpus(tmp_path)
    assert err.value.code == "duplicate-identity"


leaves = st.one_of(
    st.integers(0, 50).map(Num),
    st.sampled_from(["n", "k", "z", "t", "c", "pi", "eulergamma"]).map(Name),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: Bin(*t)),
        children.map(Neg),
        st.tuples(st.sampled_from(["sin", "fact", "harmonic", "sqrt"]), children).map(lambda t: Call(t[0], (t[1],))),
        st.tuples(children, children).map(lambda t: Call("sphj", t)),
    )


exprs = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(exprs)
def test_expression_round_trip(node):
    text = print_expr(node)
    assert parse_expr(text) == node, text

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import formulas
from itl.decide import VALID, decide_valid
from itl.formula import Eventually, Implies, Next, parse
from itl.proofcheck import (BUNDLED, Proof, ProofError, ProofLine, bundled_proofs, check_proof,
                            format_proof, load_bundled, match_axiom, parse_proof)
from itl.semantics import model_valid, random_model

CONCLUSIONS = {
    "next_and.proof": "X (p & q) <-> X p & X q",
    "next_or.proof": "X (p | q) <-> X p | X q",
    "eventually_unfold.proof": "F p -> p | X F p",
}


def rejection(text):
    with pytest.raises(ProofError) as e:
        check_proof(parse_proof(text))
    return e.value.line, e.value.reason


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_proofs_check(name):
    assert check_proof(load_bundled(name)) == parse(CONCLUSIONS[name])


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_conclusions_are_sound(name):
    f = check_proof(load_bundled(name))
    assert decide_valid(f).status == VALID
    rng = random.Random(name)
    for _ in range(100):
        assert model_valid(random_model(rng, max_worlds=5), f)


@pytest.mark.parametrize("text, scheme, ok", [
    ("X false -> false", "A2", True),
    ("X p & X (q | r) -> X (p & (q | r))", "A3", True),
    ("X (p & q) -> X p & X q", "A3", False),
    ("X (p | ~q) -> X p | X ~q", "A4", True),
    ("X (p -> q) -> X p -> X q", "A5", True),
    ("X (p -> q) -> X q -> X p", "A5", False),
    ("p | X F p -> F p", "A6", True),
    ("X q | X F q -> F q", "A6", False),
    ("(p -> q) | X F (p -> q) -> F (p -> q)", "A6", True),
    ("p | X F q -> F p", "A6", False),
])
def test_match_axiom(text, scheme, ok):
    assert match_axiom(parse(text), scheme) is ok


def test_unknown_scheme():
    with pytest.raises(ValueError):
        match_axiom(parse("p"), "A9")


def test_metavariables_bind_consistently():
    assert not match_axiom(parse("X p & X q -> X (q & p)"), "A3")
    assert match_axiom(parse("X p & X p -> X (p & p)"), "A3")


@pytest.mark.parametrize("text, line, reason", [
    ("", 0, "empty-proof"),
    ("1 A1 X p", 1, "not-a-tautology"),
    ("1 A1 p -> p\n2 MP 1 3 p", 2, "bad-reference"),
    ("1 A1 p -> p\n2 MP 2 1 p", 2, "bad-reference"),
    ("2 A1 p -> p", 2, "bad-numbering"),
    ("1 A1 G p -> G p", 1, "box-formula"),
    ("1 A3 X (p & q) -> X p & X q", 1, "scheme-mismatch"),
    ("1 A2 5 X false -> false", 1, "unparsable-formula"),
    ("1 A1 p -> p\n2 NEC 1 X (q -> q)", 2, "rule-mismatch"),
    ("1 A1 p -> p\n2 DIST 1 F p -> p", 2, "rule-mismatch"),
    ("1 A1 X p -> X p\n2 IND 1 F p -> p", 2, "rule-mismatch"),
    ("1 A1 p -> p\n2 MP 1 1 p", 2, "rule-mismatch"),
    ("1 CUT p", 1, "unknown-rule"),
    ("1 A1 p ->", 1, "unparsable-formula"),
    ("one A1 p", 1, "malformed-line"),
    ("1 MP p", 1, "malformed-line"),
])
def test_rejections(text, line, reason):
    assert rejection(text) == (line, reason)


def test_rules_accept_their_shapes():
    text = """
    # DIST and IND on identities
    1 A1 p -> p
    2 DIST 1 F p -> F p
    3 A1 X p -> X p
    4 NEC 1 X (p -> p)
    """
    assert check_proof(parse_proof(text)) == parse("X (p -> p)")
    a = parse("p -> p")
    ind = Proof((ProofLine(1, Implies(Next(a), a), "A1"),
                 ProofLine(2, Implies(Eventually(a), a), "IND", (1,))))
    assert check_proof(ind) == Implies(Eventually(a), a)


def test_first_failure_reported():
    text = "1 A1 p -> p\n2 A1 X p\n3 CUT q"
    assert rejection(text) == (2, "not-a-tautology")


def test_error_message_names_line():
    with pytest.raises(ProofError, match="line 2: rule-mismatch"):
        check_proof(parse_proof("1 A1 p -> p\n2 NEC 1 X q"))


@pytest.mark.parametrize("name", BUNDLED)
def test_format_round_trip(name):
    proof = load_bundled(name)
    assert parse_proof(format_proof(proof)) == proof


def test_bundled_texts_available():
    assert set(bundled_proofs()) == set(BUNDLED)


def model_valid_all(f, models):
    return all(model_valid(m, f) for m in models)


@settings(max_examples=60)
@given(formulas(box=False, max_leaves=4), formulas(box=False, max_leaves=4),
       st.integers(0, 10 ** 6))
def test_rules_preserve_validity_on_a_model(a, b, seed):
    m = [random_model(random.Random(seed), max_worlds=5)]
    if model_valid_all(Implies(a, b), m):
        assert model_valid_all(Implies(Eventually(a), Eventually(b)), m)
        if model_valid_all(a, m):
            assert model_valid_all(b, m)
    if model_valid_all(a, m):
        assert model_valid_all(Next(a), m)
    if model_valid_all(Implies(Next(a), a), m):
        assert model_valid_all(Implies(Eventually(a), a), m)

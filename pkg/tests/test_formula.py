import pytest
from hypothesis import given

from conftest import formulas
from itl.formula import (BOTTOM, TOP, And, Atom, Eventually, Henceforth, Implies, Next, Or,
                         ParseError, atoms, closure, conj, disj, iff, is_box_free, neg, parse,
                         render, size)

p, q, r = Atom("p"), Atom("q"), Atom("r")


@pytest.mark.parametrize("text, expected", [
    ("X p -> F p", Implies(Next(p), Eventually(p))),
    ("~p", Implies(p, BOTTOM)),
    ("p -> q -> r", Implies(p, Implies(q, r))),
    ("true", Implies(BOTTOM, BOTTOM)),
    ("p <-> q", And(Implies(p, q), Implies(q, p))),
    ("p & q | r", Or(And(p, q), r)),
    ("p | q & r", Or(p, And(q, r))),
    ("~p & q", And(Implies(p, BOTTOM), q)),
    ("X F G p", Next(Eventually(Henceforth(p)))),
    ("p # trailing comment\n & q", And(p, q)),
    ("(p -> q) -> r", Implies(Implies(p, q), r)),
    ("p <-> q <-> r", iff(p, iff(q, r))),
])
def test_parse(text, expected):
    assert parse(text) == expected


@pytest.mark.parametrize("f, text", [
    (Implies(Next(p), Next(q)), "X p -> X q"),
    (BOTTOM, "false"),
    (And(p, Or(q, r)), "p & (q | r)"),
    (Implies(Implies(p, q), r), "(p -> q) -> r"),
    (Next(And(p, q)), "X (p & q)"),
    (TOP, "true"),
])
def test_render(f, text):
    assert render(f) == text


@pytest.mark.parametrize("text", ["p q", "p & ", "(p", "p -> q <-> r", "P", "p $ q", ""])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert e.value.line == 1 and e.value.column >= 1


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as e:
        parse("p & ")
    assert "atom" in e.value.expected and "(" in e.value.expected


def test_keywords_are_not_atoms():
    assert parse("false") == BOTTOM
    assert parse("falsey") == Atom("falsey")


@pytest.mark.parametrize("text, members", [
    ("F p", ["p", "F p"]),
    ("F p -> p", ["p", "F p", "F p -> p"]),
    ("~p", ["p", "false", "p -> false"]),
])
def test_closure(text, members):
    assert set(closure(parse(text))) == {parse(m) for m in members}


def test_closure_orders_subformulas_first():
    sigma = closure(parse("(X p -> X q) -> X (p -> q)"))
    for i, f in enumerate(sigma):
        assert all(sigma.index[c] < i for c in f.children())


@pytest.mark.parametrize("text, expected", [
    ("F (p -> X q)", True), ("G p", False), ("p | ~p", True), ("X (q & G p)", False),
])
def test_box_free(text, expected):
    assert is_box_free(parse(text)) is expected


def test_sugar_helpers():
    assert neg(p) == parse("~p")
    assert conj([]) == TOP and disj([]) == BOTTOM
    assert conj([p, q, r]) == And(And(p, q), r)
    assert disj([p]) == p
    assert atoms(parse("p & X (q | F r)")) == {"p", "q", "r"}


def test_formulas_are_immutable_and_hashable():
    f = parse("p & q")
    with pytest.raises(AttributeError):
        f.left = q
    assert len({parse("p & q"), And(p, q)}) == 1


@given(formulas(max_leaves=12))
def test_render_round_trip(f):
    assert parse(render(f)) == f


@given(formulas(max_leaves=12))
def test_closure_is_subformula_closed_and_small(f):
    sigma = closure(f)
    assert f in sigma
    assert len(sigma) <= size(f)
    for g in sigma:
        assert all(c in sigma for c in g.children())

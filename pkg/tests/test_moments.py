import pytest

from itl.formula import closure, parse
from itl.moments import (BudgetExceeded, Moment, find_reduction, generate_irr, irr_bound,
                         is_irreducible, maps_to, submoment, tower)
from itl.structures import WEAK, classify, validate_frame
from itl.typesys import TwoSidedType, enumerate_types, st_related, type_leq
from oracles import (all_trees, brute_irr_codes, brute_maps_to, brute_reducible,
                     moment_is_frame)

SP = closure(parse("p"))
SFP = closure(parse("F p"))


def T(sigma, negative, positive):
    return TwoSidedType.from_sides(sigma, [parse(s) for s in negative], [parse(s) for s in positive])


NEG, POS = T(SP, ["p"], []), T(SP, [], ["p"])


def chain(*labels):
    m = Moment(labels[-1])
    for t in reversed(labels[:-1]):
        m = Moment(t, [m])
    return m


def test_canonical_codes():
    assert Moment(POS).code == Moment(POS).code
    a, b = Moment(T(SFP, [], ["p", "F p"])), Moment(T(SFP, ["p"], ["F p"]))
    root = T(SFP, ["p", "F p"], [])
    assert Moment(root, [a, b]).code == Moment(root, [b, a]).code
    assert chain(NEG, POS).code != Moment(NEG).code


def test_submoments():
    c = chain(NEG, POS)
    assert submoment(c, 0) == c
    assert submoment(c, 1) == Moment(POS)
    three = chain(*enumerate_types(SFP))
    assert submoment(three, 1) == chain(*enumerate_types(SFP)[1:])
    with pytest.raises(IndexError):
        submoment(c, 5)


def test_reduction_examples():
    r = find_reduction(chain(POS, POS))
    assert r is not None and r.reduct == Moment(POS)
    assert find_reduction(chain(NEG, POS)) is None
    twins = Moment(NEG, [Moment(POS), Moment(POS)])
    assert find_reduction(twins) is not None
    assert is_irreducible(chain(NEG, POS)) and not is_irreducible(twins)


def test_reduction_is_a_retraction():
    m = Moment(NEG, [chain(NEG, POS), Moment(POS)])
    r = find_reduction(m)
    assert r is not None
    assert all(r.pi[r.pi[x]] == r.pi[x] for x in range(m.size))
    assert set(r.pi) == set(r.kept) and len(r.kept) < m.size
    assert r.reduct.size == len(r.kept)


@pytest.mark.parametrize("text, max_nodes", [("F p", 4), ("~p", 4), ("X p", 4)])
def test_reduction_search_matches_brute_force(text, max_nodes):
    for m in all_trees(tuple(enumerate_types(closure(parse(text)))), max_nodes):
        assert (find_reduction(m) is None) == (not brute_reducible(m)), m.render_tree()


@pytest.mark.parametrize("text, count", [
    ("p", 3), ("F p", 8), ("false", 1), ("~p", 4), ("X p", 18), ("p & q", 18), ("F p -> p", 13),
    ("p -> q", 47),
])
def test_irreducible_counts(text, count):
    assert len(generate_irr(closure(parse(text)))) == count


@pytest.mark.parametrize("text, max_nodes", [
    ("p", 4), ("F p", 5), ("false", 4), ("~p", 5), ("X p", 6), ("p & q", 6),
])
def test_generation_matches_brute_force(text, max_nodes):
    sigma = closure(parse(text))
    generated = {m.code for m in generate_irr(sigma).moments}
    assert generated == brute_irr_codes(tuple(enumerate_types(sigma)), max_nodes)


def test_moments_over_p():
    irr = generate_irr(SP)
    assert {m.code for m in irr.moments} == {Moment(NEG).code, Moment(POS).code,
                                             chain(NEG, POS).code}


@pytest.mark.parametrize("text", ["p", "F p", "~p", "X p", "p -> q", "F p -> p"])
def test_generated_moments_invariants(text):
    irr = generate_irr(closure(parse(text)))
    codes = {m.code for m in irr.moments}
    for m in irr.moments:
        assert is_irreducible(m)
        assert moment_is_frame(m)
        assert validate_frame(m.to_structure()) == []
        for node in m.nodes():
            assert node.code in codes
            for c in node.children:
                assert type_leq(node.label, c.label) and node.label != c.label
    x = irr.to_structure()
    assert classify(x).at_least(WEAK)
    for a in x.worlds:
        for b in x.up[a]:
            assert type_leq(x.labels[a], x.labels[b])


def test_maps_to_examples():
    assert maps_to(Moment(NEG), Moment(POS))
    assert maps_to(chain(NEG, POS), Moment(POS))
    top = Moment(T(SFP, ["p", "F p"], []))
    assert maps_to(top, top)
    assert not maps_to(Moment(T(SFP, ["p"], ["F p"])), top)


@pytest.mark.parametrize("text", ["F p", "X p", "~p"])
def test_maps_to_matches_brute_force(text):
    types = tuple(enumerate_types(closure(parse(text))))
    small = [m for m in all_trees(types, 3) if moment_is_frame(m)]
    for v in small:
        for w in small:
            assert maps_to(v, w) == brute_maps_to(v, w, st_related)


def test_successor_edges_agree_with_maps_to():
    irr = generate_irr(closure(parse("F p -> p")))
    for i, v in enumerate(irr.moments):
        succ = set(irr.successors(i))
        for j, w in enumerate(irr.moments):
            assert (j in succ) == maps_to(v, w)


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        generate_irr(closure(parse("X X p")), max_moments=50)
    with pytest.raises(BudgetExceeded):
        generate_irr(closure(parse("p -> q")), max_nodes=3)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("ITL_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        generate_irr(closure(parse("p -> q")))


def test_bound():
    assert tower(2, 2) == 16 and tower(5, 0) == 5
    assert irr_bound(1) == 16
    assert irr_bound(3) is None
    assert len(generate_irr(SP)) <= irr_bound(len(SP))


def test_mixed_closures_rejected():
    with pytest.raises(ValueError):
        Moment(NEG, [Moment(T(SFP, [], ["p", "F p"]))])

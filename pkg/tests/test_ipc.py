import random

import pytest

from itl.formula import And, Atom, Bottom, Implies, Or, parse
from itl.ipc import abstract_modal_atoms, ipc_valid, kripke_counter_search, rooted_posets
from oracles import random_formula

THEOREMS = [
    "p -> q -> p",
    "(p -> q -> r) -> (p -> q) -> p -> r",
    "p & (p -> q) -> q",
    "p & q -> q & p",
    "p | q -> q | p",
    "false -> p",
    "p -> ~~p",
    "~~~p -> ~p",
    "(p -> q) -> ~q -> ~p",
    "~(p | q) <-> ~p & ~q",
    "~~(p | ~p)",
    "(p | q -> r) <-> (p -> r) & (q -> r)",
    "(p -> q & r) <-> (p -> q) & (p -> r)",
    "p & (q | r) -> p & q | p & r",
    "(p -> q) -> (q -> r) -> p -> r",
    "~p | q -> p -> q",
    "(p & q -> r) <-> (p -> q -> r)",
    "~~(~~p -> p)",
    "p | p <-> p",
    "(p -> q) -> p & r -> q & r",
]

NON_THEOREMS = [
    "((p -> q) -> p) -> p",
    "p | ~p",
    "~p | ~~p",
    "~~p -> p",
    "(p -> q) | (q -> p)",
    "(p -> q | r) -> (p -> q) | (p -> r)",
    "(p -> q) -> ~p | q",
    "~(p & q) -> ~p | ~q",
    "p -> q",
    "(~~p -> p) -> p | ~p",
]


def forces(model, w, f) -> bool:
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return f.name in model.valuation[w]
    if isinstance(f, And):
        return forces(model, w, f.left) and forces(model, w, f.right)
    if isinstance(f, Or):
        return forces(model, w, f.left) or forces(model, w, f.right)
    assert isinstance(f, Implies)
    return all(not forces(model, v, f.left) or forces(model, v, f.right) for v in model.up[w])


def check_countermodel(model, f):
    n = model.size
    for w in range(n):
        assert w in model.up[w]
        assert 0 in range(n) and w in model.up[0]
        for v in model.up[w]:
            assert model.up[v] <= model.up[w]
            assert model.valuation[w] <= model.valuation[v]
    assert not forces(model, 0, f)


@pytest.mark.parametrize("text", THEOREMS)
def test_theorems(text):
    f = parse(text)
    assert ipc_valid(f)
    assert kripke_counter_search(f, 3) is None


@pytest.mark.parametrize("text", NON_THEOREMS)
def test_non_theorems_have_countermodels(text):
    f = parse(text)
    assert not ipc_valid(f)
    model = kripke_counter_search(f, 3)
    assert model is not None
    check_countermodel(model, f)


def test_excluded_middle_countermodel_is_two_chain():
    model = kripke_counter_search(parse("p | ~p"), 2)
    assert model.size == 2
    assert model.valuation[0] == frozenset() and model.valuation[1] == {"p"}


def test_peirce_refuted_on_two_chain():
    assert kripke_counter_search(parse("((p -> q) -> p) -> p"), 2).size == 2


def test_valid_formula_has_no_countermodel():
    assert kripke_counter_search(parse("p -> p"), 4) is None


def test_rejects_temporal_input():
    with pytest.raises(ValueError):
        kripke_counter_search(parse("X p"), 2)


def test_abstraction_shares_atoms():
    skel, mapping = abstract_modal_atoms(parse("X p -> X p"))
    assert isinstance(skel, Implies) and skel.left == skel.right
    assert list(mapping) == [parse("X p")]
    skel, mapping = abstract_modal_atoms(parse("F p & (F p -> q) -> q"))
    assert len(mapping) == 1 and ipc_valid(skel)


def test_abstraction_avoids_existing_names():
    skel, mapping = abstract_modal_atoms(parse("a0 -> X a0"))
    assert mapping[parse("X a0")] != Atom("a0")
    assert not ipc_valid(skel)


def test_abstraction_is_by_maximal_subformula():
    skel, mapping = abstract_modal_atoms(parse("X (p & q) -> X p"))
    assert set(mapping) == {parse("X (p & q)"), parse("X p")}


def test_rooted_posets_have_root_zero():
    for n in range(1, 5):
        for up in rooted_posets(n):
            assert up[0] == frozenset(range(n))


def test_prover_agrees_with_countermodel_search():
    rng = random.Random(7)
    for _ in range(500):
        f = random_formula(rng, rng.randint(1, 6), atoms="pqr", temporal=False)
        counter = kripke_counter_search(f, 4)
        assert ipc_valid(f) == (counter is None), f
        if counter is not None:
            check_countermodel(counter, f)


def test_kreisel_putnam_needs_four_worlds():
    f = parse("(~p -> q | r) -> (~p -> q) | (~p -> r)")
    assert not ipc_valid(f)
    assert kripke_counter_search(f, 3) is None
    check_countermodel(kripke_counter_search(f, 4), f)

"""Simulations between labelled structures and the formulas that define them."""

from __future__ import annotations

from .formula import BOTTOM, TOP, And, Formula, Implies, Or, conj, disj
from .structures import LabelledStructure, StructureError
from .typesys import type_sub

__all__ = ["largest_simulation", "simulates", "is_simulation", "is_dynamic_simulation",
           "sim_formula", "simplify_units"]


def _check_closures(x: LabelledStructure, y: LabelledStructure) -> None:
    if not x.sigma.issubset(y.sigma):
        raise StructureError("the first structure's closure is not contained in the second's")


def largest_simulation(x: LabelledStructure, y: LabelledStructure) -> frozenset:
    """Greatest forward-confluent relation whose pairs respect labels."""
    _check_closures(x, y)
    rel = {(a, b) for a in x.worlds for b in y.worlds if type_sub(x.labels[a], y.labels[b])}
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for a2 in x.up[a]:
                if not any((a2, b2) in rel for b2 in y.up[b]):
                    rel.discard((a, b))
                    changed = True
                    break
    return frozenset(rel)


def simulates(x: LabelledStructure, wx, y: LabelledStructure, wy) -> bool:
    return (wx, wy) in largest_simulation(x, y)


def is_simulation(x: LabelledStructure, y: LabelledStructure, e) -> bool:
    _check_closures(x, y)
    e = set(e)
    for a, b in e:
        if not type_sub(x.labels[a], y.labels[b]):
            return False
        for a2 in x.up[a]:
            if not any((a2, b2) in e for b2 in y.up[b]):
                return False
    return True


def is_dynamic_simulation(x: LabelledStructure, y: LabelledStructure, e) -> bool:
    """Every successor step on the right is matched on the left."""
    if x.succ is None or y.succ is None:
        raise StructureError("both structures need a successor relation")
    e = set(e)
    sx = x.successors()
    for b, b2 in y.succ:
        for a in (a for a, bb in e if bb == b):
            if not any((a2, b2) in e for a2 in sx[a]):
                return False
    return True


def sim_formula(w: LabelledStructure, world, simplify: bool = False) -> Formula:
    """Sim(world): fails at a point exactly when something above it simulates ``world``.

    Built bottom-up over the strict upper set: the positive label implies the
    disjunction of the negative label and of Sim over every world strictly
    above, in world order.
    """
    if world not in w.up:
        raise StructureError(f"unknown world {world!r}")
    memo: dict = {}

    def build(v) -> Formula:
        if v in memo:
            return memo[v]
        t = w.labels[v]
        pos = [f for i, f in enumerate(w.sigma) if t.pos >> i & 1]
        neg = [f for i, f in enumerate(w.sigma) if not t.pos >> i & 1]
        above = [u for u in w.worlds if u != v and u in w.up[v]]
        f = Implies(conj(pos), disj(neg + [build(u) for u in above]))
        memo[v] = f
        return f

    f = build(world)
    return simplify_units(f) if simplify else f


def simplify_units(f: Formula) -> Formula:
    """Drop ``true`` from conjunctions and premises, ``false`` from disjunctions."""
    if isinstance(f, And):
        a, b = simplify_units(f.left), simplify_units(f.right)
        if a == TOP:
            return b
        if b == TOP:
            return a
        return And(a, b)
    if isinstance(f, Or):
        a, b = simplify_units(f.left), simplify_units(f.right)
        if a == BOTTOM:
            return b
        if b == BOTTOM:
            return a
        return Or(a, b)
    if isinstance(f, Implies):
        if f == TOP:
            return f
        a, b = simplify_units(f.left), simplify_units(f.right)
        if a == TOP:
            return b
        return Implies(a, b)
    return f

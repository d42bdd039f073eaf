"""Intuitionistic propositional validity.

``ipc_valid`` runs Dyckhoff's contraction-free sequent calculus G4ip.
``kripke_counter_search`` is the independent route: exhaustive search over
small rooted Kripke models, evaluated bit-parallel over all valuations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .formula import (And, Atom, Bottom, Eventually, Formula, Henceforth,
                      Implies, Next, Or, atoms, render)

__all__ = ["abstract_modal_atoms", "ipc_valid", "kripke_counter_search",
           "KripkeModel", "is_propositional"]

_MODAL = (Next, Eventually, Henceforth)


def is_propositional(f: Formula) -> bool:
    if isinstance(f, _MODAL):
        return False
    return all(is_propositional(c) for c in f.children())


def abstract_modal_atoms(f: Formula, prefix: str = "a") -> tuple[Formula, dict[Formula, Atom]]:
    """Replace each maximal modal subformula by a fresh atom.

    Structurally equal modal subformulas share one atom.  Fresh names avoid
    the atoms already present in ``f``.
    """
    taken = atoms(f)
    mapping: dict[Formula, Atom] = {}
    counter = itertools.count()

    def fresh() -> Atom:
        while True:
            name = f"{prefix}{next(counter)}"
            if name not in taken:
                return Atom(name)

    def go(g: Formula) -> Formula:
        if isinstance(g, _MODAL):
            if g not in mapping:
                mapping[g] = fresh()
            return mapping[g]
        if isinstance(g, And):
            return And(go(g.left), go(g.right))
        if isinstance(g, Or):
            return Or(go(g.left), go(g.right))
        if isinstance(g, Implies):
            return Implies(go(g.left), go(g.right))
        return g

    return go(f), mapping


# ------------------------------------------------------------------ G4ip

def _key(f: Formula) -> str:
    return render(f)


def _ctx(fs) -> tuple[Formula, ...]:
    return tuple(sorted(fs, key=_key))


def _remove(gamma: tuple, i: int) -> list:
    return list(gamma[:i]) + list(gamma[i + 1:])


@lru_cache(maxsize=200_000)
def _prove(gamma: tuple[Formula, ...], goal: Formula) -> bool:
    if goal in gamma or any(isinstance(g, Bottom) for g in gamma):
        return True

    # invertible right rules
    if isinstance(goal, And):
        return _prove(gamma, goal.left) and _prove(gamma, goal.right)
    if isinstance(goal, Implies):
        return _prove(_ctx(gamma + (goal.left,)), goal.right)

    # invertible left rules
    atoms_in = {g for g in gamma if isinstance(g, Atom)}
    for i, g in enumerate(gamma):
        if isinstance(g, And):
            return _prove(_ctx(_remove(gamma, i) + [g.left, g.right]), goal)
        if isinstance(g, Or):
            rest = _remove(gamma, i)
            return (_prove(_ctx(rest + [g.left]), goal)
                    and _prove(_ctx(rest + [g.right]), goal))
        if isinstance(g, Implies):
            a, b = g.left, g.right
            if isinstance(a, Bottom):
                return _prove(_ctx(_remove(gamma, i)), goal)
            if isinstance(a, Atom) and a in atoms_in:
                return _prove(_ctx(_remove(gamma, i) + [b]), goal)
            if isinstance(a, And):
                return _prove(_ctx(_remove(gamma, i) + [Implies(a.left, Implies(a.right, b))]), goal)
            if isinstance(a, Or):
                return _prove(_ctx(_remove(gamma, i) + [Implies(a.left, b), Implies(a.right, b)]), goal)

    # non-invertible choices
    if isinstance(goal, Or):
        if _prove(gamma, goal.left) or _prove(gamma, goal.right):
            return True
    for i, g in enumerate(gamma):
        if isinstance(g, Implies) and isinstance(g.left, Implies):
            c, d = g.left.left, g.left.right
            rest = _remove(gamma, i)
            if (_prove(_ctx(rest + [Implies(d, g.right)]), Implies(c, d))
                    and _prove(_ctx(rest + [g.right]), goal)):
                return True
    return False


def ipc_valid(f: Formula) -> bool:
    """True iff ``f`` is an intuitionistic propositional tautology."""
    if not is_propositional(f):
        raise ValueError(f"not a propositional formula: {render(f)}")
    return _prove((), f)


# ------------------------------------------------- countermodel search

@dataclass(frozen=True)
class KripkeModel:
    """Rooted intuitionistic Kripke model; world 0 is the root."""

    size: int
    up: tuple[frozenset[int], ...]          # up[w] = {v : w <= v}
    valuation: tuple[frozenset[str], ...]

    def leq(self, w: int, v: int) -> bool:
        return v in self.up[w]

    def forces(self, w: int, f: Formula) -> bool:
        if isinstance(f, Bottom):
            return False
        if isinstance(f, Atom):
            return f.name in self.valuation[w]
        if isinstance(f, And):
            return self.forces(w, f.left) and self.forces(w, f.right)
        if isinstance(f, Or):
            return self.forces(w, f.left) or self.forces(w, f.right)
        if isinstance(f, Implies):
            return all(not self.forces(v, f.left) or self.forces(v, f.right)
                       for v in self.up[w])
        raise ValueError(f"not propositional: {render(f)}")

    def is_persistent(self) -> bool:
        return all(self.valuation[w] <= self.valuation[v]
                   for w in range(self.size) for v in self.up[w])


@lru_cache(maxsize=None)
def rooted_posets(n: int) -> tuple[tuple[frozenset[int], ...], ...]:
    """Partial orders on 0..n-1 with 0 as least element.

    Only naturally labelled orders (i < j whenever i strictly below j) are
    produced; every finite poset is isomorphic to one of them.
    """
    pairs = [(i, j) for i in range(1, n) for j in range(i + 1, n)]
    out = []
    for bits in range(1 << len(pairs)):
        rel = {(i, i) for i in range(n)} | {(0, j) for j in range(n)}
        rel |= {pairs[k] for k in range(len(pairs)) if bits >> k & 1}
        transitive = all((a, c) in rel for (a, b) in rel for (b2, c) in rel if b == b2)
        if transitive:
            out.append(tuple(frozenset(v for v in range(n) if (w, v) in rel) for w in range(n)))
    return tuple(out)


def _upsets(up: tuple[frozenset[int], ...]) -> list[frozenset[int]]:
    n = len(up)
    res = []
    for bits in range(1 << n):
        s = frozenset(w for w in range(n) if bits >> w & 1)
        if all(up[w] <= s for w in s):
            res.append(s)
    return res


def _eval_parallel(f, up, world_bits, n, full):
    """Truth of ``f`` per world, each an int bitmask over valuation indices."""
    memo = {}

    def go(g):
        if g in memo:
            return memo[g]
        if isinstance(g, Bottom):
            r = [0] * n
        elif isinstance(g, Atom):
            r = world_bits[g.name]
        elif isinstance(g, And):
            a, b = go(g.left), go(g.right)
            r = [x & y for x, y in zip(a, b)]
        elif isinstance(g, Or):
            a, b = go(g.left), go(g.right)
            r = [x | y for x, y in zip(a, b)]
        elif isinstance(g, Implies):
            a, b = go(g.left), go(g.right)
            local = [(full ^ x) | y for x, y in zip(a, b)]
            r = []
            for w in range(n):
                acc = full
                for v in up[w]:
                    acc &= local[v]
                r.append(acc)
        else:
            raise ValueError(f"not propositional: {render(g)}")
        memo[g] = r
        return r

    return go(f)


def kripke_counter_search(f: Formula, max_worlds: int) -> KripkeModel | None:
    """Smallest rooted Kripke model (at most ``max_worlds``) refuting ``f`` at its root."""
    if max_worlds < 1:
        raise ValueError("max_worlds must be at least 1")
    if not is_propositional(f):
        raise ValueError(f"not a propositional formula: {render(f)}")
    names = sorted(atoms(f))
    for n in range(1, max_worlds + 1):
        for up in rooted_posets(n):
            ups = _upsets(up)
            combos = list(itertools.product(range(len(ups)), repeat=len(names)))
            full = (1 << len(combos)) - 1
            world_bits = {}
            for a, name in enumerate(names):
                bits = [0] * n
                for k, combo in enumerate(combos):
                    for w in ups[combo[a]]:
                        bits[w] |= 1 << k
                world_bits[name] = bits
            root = _eval_parallel(f, up, world_bits, n, full)[0]
            missing = full & ~root
            if missing:
                k = (missing & -missing).bit_length() - 1
                combo = combos[k]
                val = tuple(frozenset(nm for a, nm in enumerate(names) if w in ups[combo[a]])
                            for w in range(n))
                return KripkeModel(n, up, val)
    return None

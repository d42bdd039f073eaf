"""Finite expanding posets with a valuation, and truth of formulas in them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Mapping

from .formula import (And, Atom, Bottom, Closure, Eventually, Formula, Henceforth,
                      Implies, Next, Or)
from .structures import LabelledStructure
from .typesys import TwoSidedType

__all__ = ["Model", "ModelError", "validate_model", "eval_formula", "truth_sets",
           "model_valid", "truth_labelling", "parse_model", "format_model", "random_model"]


class ModelError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Model:
    """Worlds, a partial order (as up-sets), a successor function and a monotone valuation."""

    worlds: tuple
    up: Mapping
    succ: Mapping
    valuation: Mapping

    def leq(self, a, b) -> bool:
        return b in self.up[a]


def validate_model(worlds: Iterable, order: Iterable[tuple], succ: Mapping,
                   valuation: Mapping[object, Iterable[str]]) -> Model:
    """Close the order edges and check every model condition.

    Raises :class:`ModelError` listing all violations.
    """
    worlds = tuple(worlds)
    ws = set(worlds)
    problems = []
    if not worlds:
        raise ModelError(["a model needs at least one world"])
    if len(ws) != len(worlds):
        problems.append("duplicate world names")
    adj = {w: set() for w in worlds}
    for a, b in order:
        if a not in ws or b not in ws:
            problems.append(f"order edge {a} {b} mentions an unknown world")
            continue
        adj[a].add(b)
    for w, v in succ.items():
        if w not in ws or v not in ws:
            problems.append(f"successor {w} -> {v} mentions an unknown world")
    for w in worlds:
        if w not in succ:
            problems.append(f"world {w} has no successor")
    val = {w: frozenset(valuation.get(w, ())) for w in worlds}
    for w in valuation:
        if w not in ws:
            problems.append(f"valuation for unknown world {w}")
    if problems:
        raise ModelError(problems)

    up = {}
    for w in worlds:
        seen = {w}
        stack = [w]
        while stack:
            for b in adj[stack.pop()]:
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
        up[w] = frozenset(seen)
    for a in worlds:
        for b in up[a]:
            if a != b and a in up[b] and worlds.index(a) < worlds.index(b):
                problems.append(f"antisymmetry fails between {a} and {b}")
    for a in worlds:
        for b in sorted(up[a], key=worlds.index):
            if succ[b] not in up[succ[a]]:
                problems.append(f"forward confluence fails: {a} <= {b} but S({a})={succ[a]} "
                                f"is not below S({b})={succ[b]}")
            if not val[a] <= val[b]:
                problems.append(f"valuation not monotone: {a} <= {b}")
    if problems:
        raise ModelError(problems)
    return Model(worlds, up, dict(succ), val)


# ------------------------------------------------------------ evaluation

def truth_sets(m: Model, formulas: Iterable[Formula]) -> dict[Formula, frozenset]:
    """Truth set of every subformula of ``formulas``."""
    out: dict[Formula, frozenset] = {}
    pre = {w: [] for w in m.worlds}
    for w, v in m.succ.items():
        pre[v].append(w)

    def go(f: Formula) -> frozenset:
        if f in out:
            return out[f]
        if isinstance(f, Bottom):
            r = frozenset()
        elif isinstance(f, Atom):
            r = frozenset(w for w in m.worlds if f.name in m.valuation[w])
        elif isinstance(f, And):
            r = go(f.left) & go(f.right)
        elif isinstance(f, Or):
            r = go(f.left) | go(f.right)
        elif isinstance(f, Implies):
            a, b = go(f.left), go(f.right)
            r = frozenset(w for w in m.worlds if all(v not in a or v in b for v in m.up[w]))
        elif isinstance(f, Next):
            a = go(f.sub)
            r = frozenset(w for w in m.worlds if m.succ[w] in a)
        elif isinstance(f, Eventually):
            # least fixpoint: the worlds whose orbit reaches the body
            r = set(go(f.sub))
            stack = list(r)
            while stack:
                for w in pre[stack.pop()]:
                    if w not in r:
                        r.add(w)
                        stack.append(w)
            r = frozenset(r)
        elif isinstance(f, Henceforth):
            # greatest fixpoint: worlds whose whole orbit stays in the body
            r = set(go(f.sub))
            changed = True
            while changed:
                changed = False
                for w in list(r):
                    if m.succ[w] not in r:
                        r.discard(w)
                        changed = True
            r = frozenset(r)
        else:
            raise TypeError(f"unknown formula {f!r}")
        out[f] = r
        return r

    for f in formulas:
        go(f)
    return out


def eval_formula(m: Model, w, f: Formula) -> bool:
    if w not in m.up:
        raise KeyError(f"unknown world {w!r}")
    return w in truth_sets(m, [f])[f]


def model_valid(m: Model, f: Formula) -> bool:
    return len(truth_sets(m, [f])[f]) == len(m.worlds)


def truth_labelling(m: Model, sigma: Closure) -> LabelledStructure:
    """Label each world with the members of ``sigma`` it satisfies."""
    sets = truth_sets(m, sigma.formulas)
    labels = {}
    for w in m.worlds:
        pos = 0
        for i, f in enumerate(sigma):
            if w in sets[f]:
                pos |= 1 << i
        labels[w] = TwoSidedType(sigma, pos)
    succ = frozenset((w, m.succ[w]) for w in m.worlds)
    return LabelledStructure(m.worlds, dict(m.up), labels, succ)


# ------------------------------------------------------------ file format

def parse_model(text: str) -> Model:
    """Read ``world``, ``order``, ``succ`` and ``val`` lines."""
    worlds, order = [], []
    succ: dict = {}
    val: dict = {}
    problems = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        head, args = line[0], line[1:]
        if head == "world" and len(args) == 1:
            worlds.append(args[0])
        elif head == "order" and len(args) == 2:
            order.append(tuple(args))
        elif head == "succ" and len(args) == 2:
            if args[0] in succ and succ[args[0]] != args[1]:
                problems.append(f"line {lineno}: successor of {args[0]} given twice")
            succ[args[0]] = args[1]
        elif head == "val" and args:
            val.setdefault(args[0], set()).update(args[1:])
        else:
            problems.append(f"line {lineno}: cannot read {raw.strip()!r}")
    if problems:
        raise ModelError(problems)
    return validate_model(worlds, order, succ, val)


def format_model(m: Model) -> str:
    lines = [f"world {w}" for w in m.worlds]
    for a in m.worlds:
        for b in m.worlds:
            if a != b and b in m.up[a]:
                lines.append(f"order {a} {b}")
    lines += [f"succ {w} {m.succ[w]}" for w in m.worlds]
    lines += [f"val {w} " + " ".join(sorted(m.valuation[w])) for w in m.worlds if m.valuation[w]]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ random models

def random_model(rng: random.Random, max_worlds: int = 6, atoms: Iterable[str] = ("p", "q"),
                 edge_prob: float = 0.4) -> Model:
    """A random valid model with 1..max_worlds worlds."""
    n = rng.randint(1, max_worlds)
    worlds = [f"w{i}" for i in range(n)]
    order = [(worlds[i], worlds[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < edge_prob]
    skeleton = validate_model(worlds, order, {w: w for w in worlds}, {})
    up = skeleton.up
    succ = _confluent_successor(rng, worlds, up)
    val = {w: set() for w in worlds}
    for a in atoms:
        # an up-set generated by a random set of worlds
        for g in worlds:
            if rng.random() < 0.3:
                for v in up[g]:
                    val[v].add(a)
    return validate_model(worlds, order, succ, val)


def _confluent_successor(rng, worlds, up) -> dict:
    order = list(worlds)
    choice: dict = {}

    def ok(w, v) -> bool:
        for x, sx in choice.items():
            if x in up[w] and sx not in up[v]:
                return False
            if w in up[x] and v not in up[sx]:
                return False
        return True

    def go(i: int, budget: list) -> bool:
        if i == len(order):
            return True
        budget[0] -= 1
        if budget[0] < 0:
            return False
        w = order[i]
        cands = list(worlds)
        rng.shuffle(cands)
        for v in cands:
            if ok(w, v):
                choice[w] = v
                if go(i + 1, budget):
                    return True
                del choice[w]
        return False

    if go(0, [200]):
        return dict(choice)
    c = rng.choice(worlds)
    return {w: c for w in worlds}

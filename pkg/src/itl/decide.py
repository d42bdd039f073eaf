"""Validity and satisfiability by greatest-fixpoint elimination on I_Sigma.

Only moments whose labels can occur in some quasimodel matter: every
survivor of the elimination lies in a quasimodel, so its nodes carry such
labels.  :func:`viable_types` computes an over-approximation of those
labels, and generation is restricted to them.  Moments are then generated
in growing size layers.  A survivor found in a layer is a genuine witness
(any layer is closed under sub-moments, and elimination on a smaller
universe only removes more); a verdict of validity needs a complete layer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .formula import Eventually, Formula, Implies, closure, is_box_free, render
from .moments import BudgetExceeded, DEFAULT_MAX_NODES, IrrFrame, generate_irr
from .structures import LabelledStructure, reachable_from
from .typesys import TwoSidedType, _st, enumerate_types, info

__all__ = [
    "reachable_set", "viable_types", "Removal", "EliminationTrace", "eliminate",
    "Verdict", "decide_valid", "decide_sat", "oracle_falsifiable", "BudgetExceeded",
    "VALID", "FALSIFIABLE", "SAT", "UNSAT",
]

VALID = "Valid"
FALSIFIABLE = "Falsifiable"
SAT = "Sat"
UNSAT = "Unsat"

SUBMOMENT_REMOVED = "submoment-removed"
NOT_SERIAL = "not-serial"


def reachable_set(x: LabelledStructure, w) -> set:
    """Worlds reachable from ``w`` by zero or more successor steps."""
    return reachable_from(x, w)


# ------------------------------------------------------------ type level

def viable_types(sigma) -> list[TwoSidedType]:
    """Greatest set of types closed under the local quasimodel demands.

    A type stays if it has an S_T-successor in the set, a witness in the set
    above it for each refuted implication, and a path of S_T-steps through
    the set fulfilling each of its eventualities.
    """
    ci = info(sigma)
    alive = {t.pos for t in enumerate_types(sigma)}
    while True:
        drop = set()
        for p in alive:
            if ci.temporal and not any(_st(ci, p, q) for q in alive):
                drop.add(p)
                continue
            for imp, left, right in ci.implications:
                if p >> imp & 1:
                    continue
                if not any(q & p == p and q >> left & 1 and not q >> right & 1 for q in alive):
                    drop.add(p)
                    break
        for ev, sub in ci.eventualities:
            good = {q for q in alive if q >> sub & 1}
            grown = True
            while grown:
                more = {p for p in alive - good if any(_st(ci, p, q) for q in good)}
                grown = bool(more)
                good |= more
            drop |= {p for p in alive if p >> ev & 1 and p not in good}
        if not drop:
            break
        alive -= drop
    return [t for t in enumerate_types(sigma) if t.pos in alive]


# ------------------------------------------------------------ elimination

@dataclass(frozen=True)
class Removal:
    moment: int
    cause: str


@dataclass
class EliminationTrace:
    rounds: list[list[Removal]]
    survivors: frozenset[int]

    def removed(self) -> list[Removal]:
        return [r for rnd in self.rounds for r in rnd]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def eliminate(irr: IrrFrame, rng: random.Random | None = None,
              require_complete: bool = True) -> EliminationTrace:
    """Remove moments until every survivor keeps its sub-moments, a successor
    and a fulfilment path for each eventuality.

    Every round collects the currently removable moments.  Without ``rng``
    all of them go; with ``rng`` a random nonempty subset goes, in random
    order, so different schedules can be compared.
    """
    if require_complete and not irr.complete:
        raise ValueError("elimination needs a complete moment frame")
    ci = info(irr.sigma)
    n = len(irr)
    succ = irr.succ
    subs = [sum(1 << j for j in irr.subs[i]) for i in range(n)]
    positive = {}
    for k in range(len(irr.sigma)):
        positive[k] = sum(1 << i for i in range(n) if irr.label(i).pos >> k & 1)

    alive = (1 << n) - 1
    rounds: list[list[Removal]] = []
    while True:
        causes: dict[int, str] = {}
        for i in _bits(alive):
            if subs[i] & ~alive:
                causes[i] = SUBMOMENT_REMOVED
            elif not succ[i] & alive:
                causes[i] = NOT_SERIAL
        for ev, sub in ci.eventualities:
            good = positive[sub] & alive
            while True:
                more = 0
                for i in _bits(alive & ~good):
                    if succ[i] & good:
                        more |= 1 << i
                if not more:
                    break
                good |= more
            for i in _bits(positive[ev] & alive & ~good):
                causes.setdefault(i, f"eventuality-unfulfilled({render(irr.sigma[ev])})")
        if not causes:
            break
        order = sorted(causes)
        if rng is not None:
            rng.shuffle(order)
            order = order[:rng.randint(1, len(order))]
        rnd = [Removal(i, causes[i]) for i in order]
        for r in rnd:
            alive &= ~(1 << r.moment)
        rounds.append(rnd)
    return EliminationTrace(rounds, frozenset(_bits(alive)))


# ------------------------------------------------------------ verdicts

@dataclass
class Verdict:
    status: str
    formula: Formula
    witness: LabelledStructure | None = None
    world: str | None = None
    stats: dict = field(default_factory=dict)

    @property
    def affirmative(self) -> bool:
        return self.status in (VALID, SAT)


def _layers(max_nodes: int):
    k = 1
    while k < max_nodes:
        yield k, False
        k += 1 if k < 4 else 2
    yield max_nodes, True


def _witness(irr: IrrFrame, survivors: frozenset[int], start: int) -> LabelledStructure:
    """A small quasimodel inside the survivors containing ``start``.

    The kept set is closed under sub-moments and holds, for every member,
    one successor plus one successor closer to fulfilling each pending
    eventuality.  All |-> edges inside the set are kept: a |-> edge relates
    each sub-moment of its source to a sub-moment of its target, so forward
    confluence survives the restriction.
    """
    ci = info(irr.sigma)
    alive = sum(1 << i for i in survivors)
    succ = irr.succ
    # distance layers towards each eventuality's fulfilment
    layers = {}
    for ev, sub in ci.eventualities:
        cur = sum(1 << i for i in survivors if irr.label(i).pos >> sub & 1)
        seen = cur
        rows = [cur]
        while cur:
            cur = sum(1 << i for i in _bits(alive & ~seen) if succ[i] & rows[-1])
            seen |= cur
            rows.append(cur)
        layers[ev] = rows

    def step(i: int) -> set:
        out = {min(_bits(succ[i] & alive))}
        pos = irr.label(i).pos
        for ev, sub in ci.eventualities:
            if pos >> ev & 1 and not pos >> sub & 1:
                rows = layers[ev]
                d = next(d for d, row in enumerate(rows) if row >> i & 1)
                out.add(min(_bits(succ[i] & rows[d - 1])))
        return out

    keep = set()
    stack = [start]
    while stack:
        i = stack.pop()
        if i in keep:
            continue
        keep.add(i)
        stack.extend(irr.subs[i])
        stack.extend(step(i))
    return irr.to_structure(keep)


def _decide(f: Formula, want_negative: bool, max_moments, max_nodes, prune) -> tuple:
    if not is_box_free(f):
        raise ValueError(f"the decision procedure covers box-free formulas only: {render(f)}")
    sigma = closure(f)
    fi = sigma.index[f]

    def hit(pos: int) -> bool:
        return (not pos >> fi & 1) if want_negative else bool(pos >> fi & 1)

    types = viable_types(sigma) if prune else list(enumerate_types(sigma))
    stats = {"closure": len(sigma), "types": len(types), "pruned": prune}
    if prune and not any(hit(t.pos) for t in types):
        stats["layer"] = 0
        return None, None, stats
    for cap, last in _layers(max_nodes):
        irr = generate_irr(sigma, max_moments=max_moments, max_nodes=max_nodes,
                           types=types, size_cap=None if last else cap)
        trace = eliminate(irr, require_complete=False)
        stats.update(layer=cap, moments=len(irr), survivors=len(trace.survivors))
        found = [i for i in sorted(trace.survivors) if hit(irr.label(i).pos)]
        if found:
            best = min(found, key=lambda i: (irr.moments[i].size, i))
            return _witness(irr, trace.survivors, best), f"m{best}", stats
        if irr.complete:
            return None, None, stats
    raise AssertionError("the last layer is always complete or raises")


def decide_valid(f: Formula, max_moments: int | None = None,
                 max_nodes: int = DEFAULT_MAX_NODES, prune: bool = True) -> Verdict:
    """Valid, or Falsifiable with a quasimodel witness falsifying ``f``."""
    witness, world, stats = _decide(f, True, max_moments, max_nodes, prune)
    if witness is None:
        return Verdict(VALID, f, stats=stats)
    return Verdict(FALSIFIABLE, f, witness, world, stats)


def decide_sat(f: Formula, max_moments: int | None = None,
               max_nodes: int = DEFAULT_MAX_NODES, prune: bool = True) -> Verdict:
    """Sat with a quasimodel witness where ``f`` is positive, or Unsat."""
    witness, world, stats = _decide(f, False, max_moments, max_nodes, prune)
    if witness is None:
        return Verdict(UNSAT, f, stats=stats)
    return Verdict(SAT, f, witness, world, stats)


# ------------------------------------------------------------ oracle

def _orders(n: int):
    """Partial orders on 0..n-1 where i below j implies i < j, as up-sets."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for bits in range(1 << len(pairs)):
        rel = {(i, i) for i in range(n)} | {pairs[k] for k in range(len(pairs)) if bits >> k & 1}
        if all((a, d) in rel for (a, b) in rel for (c, d) in rel if b == c):
            yield [frozenset(v for v in range(n) if (w, v) in rel) for w in range(n)]


def _oracle_labels(sigma, types: list[TwoSidedType]) -> list[TwoSidedType]:
    """Drop labels that cannot sit in any quasimodel (plain set iteration)."""
    forms = list(sigma)
    keep = list(types)
    changed = True
    while changed:
        changed = False
        for t in list(keep):
            ok = any(_st(info(sigma), t.pos, u.pos) for u in keep) or not info(sigma).temporal
            for g in forms:
                if not ok:
                    break
                if isinstance(g, Implies) and t.is_negative(g):
                    ok = any(t.positive <= u.positive and u.is_positive(g.left)
                             and u.is_negative(g.right) for u in keep)
                elif isinstance(g, Eventually) and t.is_positive(g) and t.is_negative(g.sub):
                    seen, frontier = {t}, [t]
                    ok = False
                    while frontier and not ok:
                        a = frontier.pop()
                        for u in keep:
                            if u not in seen and _st(info(sigma), a.pos, u.pos):
                                if u.is_positive(g.sub):
                                    ok = True
                                    break
                                seen.add(u)
                                frontier.append(u)
            if not ok:
                keep.remove(t)
                changed = True
    return keep


def _largest_successor_relation(n, up, labels, ci):
    """The greatest sensible, forward-confluent relation on a labelled frame."""
    rel = {(a, b) for a in range(n) for b in range(n) if _st(ci, labels[a].pos, labels[b].pos)}
    changed = True
    while changed:
        changed = False
        for a, b in sorted(rel):
            if any(not any((a2, b2) in rel for b2 in up[b]) for a2 in up[a]):
                rel.discard((a, b))
                changed = True
    return rel


def oracle_falsifiable(f: Formula, max_worlds: int) -> LabelledStructure | None:
    """First quasimodel with at most ``max_worlds`` worlds falsifying ``f``.

    Worlds are searched by count, then by order, then by labelling from the
    top worlds down.  For a fixed labelled frame a quasimodel successor
    relation exists iff the greatest sensible forward-confluent relation is
    serial and fulfils every eventuality, since both properties pass to
    larger relations; that relation is what gets returned.
    """
    if not is_box_free(f):
        raise ValueError(f"the oracle covers box-free formulas only: {render(f)}")
    if not 1 <= max_worlds <= 5:
        raise ValueError("max_worlds must be between 1 and 5")
    sigma = closure(f)
    ci = info(sigma)
    labels_ok = _oracle_labels(sigma, enumerate_types(sigma))
    if not any(t.is_negative(f) for t in labels_ok):
        return None
    imps = [(i, ci.sigma.index[g.left], ci.sigma.index[g.right])
            for i, g in enumerate(sigma) if isinstance(g, Implies)]

    for n in range(1, max_worlds + 1):
        for up in _orders(n):
            found = _search_labels(n, up, labels_ok, imps, f, ci)
            if found is not None:
                return found
    return None


def _search_labels(n, up, domain, imps, f, ci):
    labels: list = [None] * n
    fi = ci.sigma.index[f]

    def frame_ok(w: int) -> bool:
        p = labels[w].pos
        for v in up[w]:
            if p & ~labels[v].pos:
                return False
        for imp, left, right in imps:
            if not p >> imp & 1 and not any(
                    labels[v].pos >> left & 1 and not labels[v].pos >> right & 1 for v in up[w]):
                return False
        return True

    def quasimodel():
        rel = _largest_successor_relation(n, up, labels, ci)
        succ = {a: [b for b in range(n) if (a, b) in rel] for a in range(n)}
        if any(not succ[a] for a in range(n)):
            return None
        for ev, sub in ci.eventualities:
            good = {w for w in range(n) if labels[w].pos >> sub & 1}
            grown = True
            while grown:
                more = {a for a in range(n) if a not in good and any(b in good for b in succ[a])}
                grown = bool(more)
                good |= more
            if any(labels[w].pos >> ev & 1 and w not in good for w in range(n)):
                return None
        names = [f"w{i}" for i in range(n)]
        return LabelledStructure(
            tuple(names), {names[w]: frozenset(names[v] for v in up[w]) for w in range(n)},
            {names[w]: labels[w] for w in range(n)},
            frozenset((names[a], names[b]) for a, b in rel))

    def go(w: int):
        if w < 0:
            if all(labels[v].pos >> fi & 1 for v in range(n)):
                return None
            return quasimodel()
        for t in domain:
            labels[w] = t
            if frame_ok(w):
                r = go(w - 1)
                if r is not None:
                    return r
        labels[w] = None
        return None

    return go(n - 1)

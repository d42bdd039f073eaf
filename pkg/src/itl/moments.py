"""Moments (finite rooted labelled trees), reductions, and the initial frame I_Sigma.

A moment is stored in canonical form: children are sorted by their
canonical code, so structurally equal moments are isomorphic labelled trees
and vice versa.  Nodes are addressed by their preorder index in that form.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .formula import Closure
from .structures import LabelledStructure
from .typesys import TwoSidedType, _st, enumerate_types, format_type, info

__all__ = [
    "Moment", "Reduction", "BudgetExceeded", "IrrFrame", "canonical_code",
    "submoment", "find_reduction", "is_irreducible", "maps_to", "generate_irr",
    "DEFAULT_MAX_MOMENTS", "DEFAULT_MAX_NODES", "tower", "irr_bound", "default_budget",
]

DEFAULT_MAX_MOMENTS = 50_000
DEFAULT_MAX_NODES = 12


def default_budget() -> int:
    env = os.environ.get("ITL_BUDGET")
    return int(env) if env else DEFAULT_MAX_MOMENTS


class BudgetExceeded(RuntimeError):
    """Moment generation hit its size limits; the partial result is unusable."""


class Moment:
    """A finite rooted tree of two-sided types, kept in canonical form."""

    __slots__ = ("label", "children", "code", "size", "_hash")

    def __init__(self, label: TwoSidedType, children: Iterable["Moment"] = ()):
        kids = sorted(children, key=lambda m: m.code)
        sigmas = {label.sigma} | {c.label.sigma for c in kids}
        if len(sigmas) != 1:
            raise ValueError("all labels of a moment must share one closure")
        self.label = label
        self.children: tuple[Moment, ...] = tuple(kids)
        self.code = (label.pos, tuple(c.code for c in kids))
        self.size = 1 + sum(c.size for c in kids)
        self._hash = hash(self.code)

    @classmethod
    def from_tree(cls, labels: Sequence[TwoSidedType], parent: Sequence[int | None]) -> "Moment":
        """Build from a parent array; exactly one node has parent ``None``."""
        roots = [i for i, p in enumerate(parent) if p is None]
        if len(roots) != 1:
            raise ValueError("a moment has exactly one root")
        kids: dict[int, list[int]] = {i: [] for i in range(len(parent))}
        for i, p in enumerate(parent):
            if p is not None:
                kids[p].append(i)

        def build(i, depth=0):
            if depth > len(parent):
                raise ValueError("parent array has a cycle")
            return cls(labels[i], [build(c, depth + 1) for c in kids[i]])
        m = build(roots[0])
        if m.size != len(parent):
            raise ValueError("parent array is not a tree")
        return m

    @property
    def sigma(self) -> Closure:
        return self.label.sigma

    def __eq__(self, other) -> bool:
        return isinstance(other, Moment) and self.code == other.code and self.sigma == other.sigma

    def __hash__(self) -> int:
        return self._hash

    def nodes(self) -> list["Moment"]:
        """Subtrees in preorder; index ``i`` is node ``i``."""
        out = []

        def go(m):
            out.append(m)
            for c in m.children:
                go(c)
        go(self)
        return out

    def flatten(self) -> tuple[list[TwoSidedType], list[int | None]]:
        labels, parent = [], []

        def go(m, p):
            i = len(labels)
            labels.append(m.label)
            parent.append(p)
            for c in m.children:
                go(c, i)
        go(self, None)
        return labels, parent

    def to_structure(self) -> LabelledStructure:
        labels, parent = self.flatten()
        edges = [(p, i) for i, p in enumerate(parent) if p is not None]
        return LabelledStructure.build(range(len(labels)), edges, dict(enumerate(labels)))

    def render_tree(self, indent: str = "") -> str:
        lines = [indent + format_type(self.label)]
        for c in self.children:
            lines.append(c.render_tree(indent + "  "))
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"Moment({self.code})"


def canonical_code(m: Moment):
    """Isomorphism invariant: (root label, sorted child codes)."""
    return m.code


def submoment(m: Moment, u: int) -> Moment:
    """The moment generated by node ``u``: the subtree above it."""
    nodes = m.nodes()
    if not 0 <= u < len(nodes):
        raise IndexError(f"moment has no node {u}")
    return nodes[u]


# ------------------------------------------------------------- reductions

@dataclass(frozen=True)
class Reduction:
    """A retraction ``pi`` of a moment onto the sub-moment on ``kept`` nodes."""

    reduct: Moment
    kept: tuple[int, ...]
    pi: tuple[int, ...]


class _Flat:
    def __init__(self, m: Moment):
        labels, parent = m.flatten()
        n = len(labels)
        self.n = n
        self.label = [t.pos for t in labels]
        self.labels = labels
        self.parent = parent
        self.kids = [[] for _ in range(n)]
        for i, p in enumerate(parent):
            if p is not None:
                self.kids[p].append(i)
        self.desc = [None] * n
        for i in reversed(range(n)):
            s = {i}
            for c in self.kids[i]:
                s |= self.desc[c]
            self.desc[i] = frozenset(s)


def _homs(fl: _Flat) -> list[list[bool]]:
    """hom[x][y]: the subtree at x maps monotonically, label-preservingly, with x -> y."""
    n = fl.n
    hom = [[False] * n for _ in range(n)]
    for x in reversed(range(n)):
        for y in range(n):
            if fl.label[x] != fl.label[y]:
                continue
            hom[x][y] = all(any(hom[c][z] for z in fl.desc[y]) for c in fl.kids[x])
    return hom


def _non_injective_endomap(fl: _Flat) -> list[int] | None:
    hom = _homs(fl)
    n = fl.n
    f = [-1] * n
    used: dict[int, int] = {}

    # preorder: parents are assigned before children; hom guarantees every
    # partial assignment extends, so we only search for a collision
    def go(x: int) -> bool:
        if x == n:
            return False
        p = fl.parent[x]
        cands = range(n) if p is None else fl.desc[f[p]]
        for y in sorted(cands):
            if not hom[x][y]:
                continue
            f[x] = y
            if used.get(y, 0):
                _complete(x + 1)
                return True
            used[y] = 1
            if go(x + 1):
                return True
            used[y] = 0
        f[x] = -1
        return False

    def _complete(x: int) -> None:
        for z in range(x, n):
            p = fl.parent[z]
            f[z] = next(y for y in sorted(fl.desc[f[p]]) if hom[z][y])

    return list(f) if go(0) else None


def find_reduction(v: Moment) -> Reduction | None:
    """A proper reduct of ``v`` with its retraction, or None if ``v`` is irreducible."""
    fl = _Flat(v)
    f = _non_injective_endomap(fl)
    if f is None:
        return None
    # some power of f is idempotent; its image is a proper subset
    g = f
    while any(g[g[x]] != g[x] for x in range(fl.n)):
        g = [f[g[x]] for x in range(fl.n)]
    kept = tuple(sorted(set(g)))
    root = min(kept, key=lambda k: len(fl.desc[k]) * -1)
    parent = []
    for k in kept:
        if k == root:
            parent.append(None)
            continue
        a = fl.parent[k]
        while a not in kept:
            a = fl.parent[a]
        parent.append(kept.index(a))
    reduct = Moment.from_tree([fl.labels[k] for k in kept], parent)
    return Reduction(reduct, kept, tuple(g))


def is_irreducible(m: Moment) -> bool:
    return find_reduction(m) is None


# ------------------------------------------------------------------ maps_to

def maps_to(v: Moment, w: Moment) -> bool:
    """Is there a sensible, forward-confluent relation linking the roots?

    Greatest fixpoint over node pairs, starting from all S_T-compatible pairs.
    """
    if v.sigma != w.sigma:
        raise ValueError("moments over different closures")
    ci = info(v.sigma)
    fv, fw = _Flat(v), _Flat(w)
    pairs = {(x, y) for x in range(fv.n) for y in range(fw.n)
             if _st(ci, fv.label[x], fw.label[y])}
    changed = True
    while changed:
        changed = False
        for (x, y) in list(pairs):
            for x2 in fv.desc[x]:
                if not any((x2, y2) in pairs for y2 in fw.desc[y]):
                    pairs.discard((x, y))
                    changed = True
                    break
    return (0, 0) in pairs


# ------------------------------------------------------------- I_Sigma

def tower(n: int, k: int) -> int:
    """Iterated exponential: tower(n, 0) = n, tower(n, k+1) = 2 ** tower(n, k)."""
    for _ in range(k):
        n = 2 ** n
    return n


def irr_bound(s: int) -> int | None:
    """Upper bound tower(s*s + s, s + 1) on the number of irreducible moments
    over a closure of size ``s``; None when it is too large to write down."""
    n = s * s + s
    for _ in range(s + 1):
        if n > 4096:
            return None
        n = 2 ** n
    return n


class IrrFrame:
    """Irreducible moments with reversed sub-moment order, root labels and the successor relation."""

    def __init__(self, sigma: Closure, moments: list[Moment], complete: bool = True):
        self.sigma = sigma
        self.moments = moments
        self.complete = complete
        self.ids = {m.code: i for i, m in enumerate(moments)}
        n = len(moments)
        # subs[i]: ids of generated sub-moments of moment i (itself included)
        self.child_ids: list[tuple[int, ...]] = []
        for m in moments:
            kids = tuple(self.ids[c.code] for c in m.children)
            self.child_ids.append(kids)
        subs: list = [None] * n
        for i in sorted(range(n), key=lambda k: moments[k].size):
            s = {i}
            for c in self.child_ids[i]:
                s |= subs[c]
            subs[i] = frozenset(s)
        self.subs = subs
        self._succ: list[int] | None = None

    def __len__(self) -> int:
        return len(self.moments)

    def label(self, i: int) -> TwoSidedType:
        return self.moments[i].label

    def leq(self, i: int, j: int) -> bool:
        """i <=_I j  iff  j is a generated sub-moment of i."""
        return j in self.subs[i]

    @property
    def succ(self) -> list[int]:
        """succ[i] is a bitmask of the moments j with moment i |-> moment j."""
        if self._succ is None:
            self._succ = _successor_masks(self)
        return self._succ

    def successors(self, i: int) -> list[int]:
        return list(_bit_indices(self.succ[i]))

    def to_structure(self, keep: Iterable[int] | None = None) -> LabelledStructure:
        keep = sorted(range(len(self.moments)) if keep is None else keep)
        ks = set(keep)
        worlds = tuple(f"m{i}" for i in keep)
        up = {f"m{i}": frozenset(f"m{j}" for j in self.subs[i] if j in ks) for i in keep}
        succ = frozenset((f"m{i}", f"m{j}") for i in keep for j in self.successors(i) if j in ks)
        labels = {f"m{i}": self.moments[i].label for i in keep}
        return LabelledStructure(worlds, up, labels, succ)


def _successor_masks(irr: IrrFrame) -> list[int]:
    """All |-> edges at once, via the tree recursion on the source moment.

    ``rel[a]`` is the set of moments b with a |-> b; a child subtree of ``a``
    must relate to some sub-moment of b, which is ``reach[c]``.
    """
    ci = info(irr.sigma)
    n = len(irr.moments)
    by_label: dict[int, int] = {}
    for j, m in enumerate(irr.moments):
        by_label[m.label.pos] = by_label.get(m.label.pos, 0) | (1 << j)
    compat_cache: dict[int, int] = {}

    def compatible(p: int) -> int:
        if p not in compat_cache:
            mask = 0
            for q, ms in by_label.items():
                if _st(ci, p, q):
                    mask |= ms
            compat_cache[p] = mask
        return compat_cache[p]

    # moments are generated children-first, so ids respect the recursion
    order = sorted(range(n), key=lambda i: irr.moments[i].size)
    parents_of: list[list[int]] = [[] for _ in range(n)]
    for j in range(n):
        for c in irr.child_ids[j]:
            parents_of[c].append(j)
    rel = [0] * n
    reach = [0] * n
    for a in order:
        mask = compatible(irr.moments[a].label.pos)
        for c in irr.child_ids[a]:
            mask &= reach[c]
            if not mask:
                break
        rel[a] = mask
        reach[a] = _upward(mask, parents_of)
    return rel


def _upward(mask: int, parents_of: list[list[int]]) -> int:
    """Moments having some member of ``mask`` as a generated sub-moment."""
    out = mask
    frontier = mask
    while frontier:
        nxt = 0
        m = frontier
        while m:
            low = m & -m
            j = low.bit_length() - 1
            m ^= low
            for p in parents_of[j]:
                if not out >> p & 1:
                    nxt |= 1 << p
        out |= nxt
        frontier = nxt
    return out


def _witness_mask(ci, pos: int) -> int:
    """Implications (by closure index) that a node labelled ``pos`` witnesses."""
    mask = 0
    for imp, left, right in ci.implications:
        if pos >> left & 1 and not pos >> right & 1:
            mask |= 1 << imp
    return mask


def _needs(ci, pos: int) -> int:
    mask = 0
    for imp, _, _ in ci.implications:
        if not pos >> imp & 1:
            mask |= 1 << imp
    return mask


def generate_irr(sigma: Closure, max_moments: int | None = None,
                 max_nodes: int = DEFAULT_MAX_NODES,
                 types: Sequence[TwoSidedType] | None = None,
                 size_cap: int | None = None) -> IrrFrame:
    """Enumerate every irreducible Sigma-moment.

    Types are processed from the largest positive set down.  A moment rooted
    at ``t`` is ``t`` over a set of earlier moments with roots strictly above
    ``t``; with irreducible children it is irreducible exactly when no child
    maps into another, so child sets are antichains of that relation.  The
    assembled tree must also witness its refuted implications internally,
    and :func:`is_irreducible` confirms every result.

    ``types`` restricts the labels allowed anywhere in a moment.  With
    ``size_cap`` larger moments are skipped rather than fatal and the frame
    is marked incomplete if any were skipped.  Without it, a moment above
    ``max_nodes`` nodes or more than ``max_moments`` moments raise
    :class:`BudgetExceeded`.
    """
    if max_moments is None:
        max_moments = default_budget()
    ci = info(sigma)
    pool = list(enumerate_types(sigma) if types is None else types)
    pool.sort(key=lambda t: (-bin(t.pos).count("1"), t.pos))
    cap = size_cap if size_cap is not None else max_nodes

    moments: list[Moment] = []
    sizes: list[int] = []
    witness: list[int] = []          # implications witnessed somewhere in moment i
    root_pos: list[int] = []
    kids: list[int] = []             # children of moment i as a bitmask
    into: list[int] = []             # moments that map into some node of moment i
    below: list[int] = []            # moments that map into a node above the root of i
    out: list[int] = []              # moments that moment i maps into
    complete = True

    for t in pool:
        p = t.pos
        own = _witness_mask(ci, p)
        need = _needs(ci, p)
        cands = [i for i in range(len(moments)) if root_pos[i] != p and root_pos[i] & p == p]
        clash = {c: (into[c] | out[c]) & ~(1 << c) for c in cands}
        overflow = [False]
        batch: list[int] = []
        for chosen in _child_sets(cands, clash, witness, sizes, own, need, cap - 1, overflow):
            if len(moments) >= max_moments:
                raise BudgetExceeded(f"more than {max_moments} irreducible moments")
            m = Moment(t, [moments[c] for c in chosen])
            if not is_irreducible(m):
                raise AssertionError(f"generated a reducible moment {m!r}")
            k = len(moments)
            kmask = sum(1 << c for c in chosen)
            bk = 0
            have = own
            for c in chosen:
                bk |= into[c]
                have |= witness[c]
            ik = bk | 1 << k
            out.append(1 << k)
            for j in batch:
                # same root label: j maps into k iff its children map above k's root
                if kids[j] & ~bk == 0:
                    ik |= 1 << j
                if kmask & ~below[j] == 0:
                    into[j] |= 1 << k
                    out[k] |= 1 << j
            for j in _bit_indices(ik):
                if j != k:
                    out[j] |= 1 << k
            moments.append(m)
            sizes.append(m.size)
            witness.append(have)
            root_pos.append(p)
            kids.append(kmask)
            into.append(ik)
            below.append(bk)
            batch.append(k)
        if overflow[0]:
            if size_cap is None:
                raise BudgetExceeded(f"an irreducible moment exceeds the node budget {max_nodes}")
            complete = False
    return IrrFrame(sigma, moments, complete)


def _bit_indices(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _child_sets(cands, clash, witness, sizes, own, need, room, overflow):
    """Antichains of ``cands`` whose witnesses cover ``need``.

    Only sets with total size at most ``room`` are produced; ``overflow[0]``
    records whether some coverable antichain was left out for size.
    """
    cands = sorted(cands, key=lambda c: sizes[c])
    n = len(cands)
    where = {c: i for i, c in enumerate(cands)}
    # conflicts as masks over candidate positions
    conflict = []
    for c in cands:
        m = 0
        for d in _bit_indices(clash[c]):
            i = where.get(d)
            if i is not None:
                m |= 1 << i
        conflict.append(m)
    size = [sizes[c] for c in cands]
    wit = [witness[c] for c in cands]
    # later[k]: witnesses available from positions k.. onwards
    later = [0] * (n + 1)
    for k in reversed(range(n)):
        later[k] = later[k + 1] | wit[k]
    chosen: list[int] = []

    def go(allowed: int, used: int, have: int):
        if need & ~have == 0:
            yield [cands[i] for i in chosen]
        while allowed:
            low = allowed & -allowed
            i = low.bit_length() - 1
            allowed ^= low
            if need & ~(have | later[i]):
                return
            if used + size[i] > room:
                overflow[0] = True
                return
            chosen.append(i)
            yield from go(allowed & ~conflict[i], used + size[i], have | wit[i])
            chosen.pop()

    yield from go((1 << n) - 1, 0, own)

"""Labelled frames, weak quasimodels and quasimodels."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .formula import Closure, Formula, parse, render
from .typesys import InvalidType, TwoSidedType, _st, format_type, info

__all__ = [
    "StructureError", "Violation", "LabelledStructure", "validate_frame",
    "Classification", "classify", "restrict", "falsifies", "reachable_from",
    "parse_structure", "format_structure", "FRAME", "WEAK", "QUASIMODEL",
]

World = Hashable

FRAME = "frame"
WEAK = "weak_quasimodel"
QUASIMODEL = "quasimodel"


class StructureError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    condition: str
    worlds: tuple
    detail: str = ""

    def __str__(self):
        ws = ", ".join(map(str, self.worlds))
        return f"{self.condition} at ({ws})" + (f": {self.detail}" if self.detail else "")


def _reflexive_transitive(worlds, edges) -> dict:
    up = {w: {w} for w in worlds}
    adj = {w: set() for w in worlds}
    for a, b in edges:
        adj[a].add(b)
    for w in worlds:
        stack = [w]
        seen = up[w]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return up


@dataclass
class LabelledStructure:
    """Worlds with a preorder, a type per world and an optional successor relation.

    ``up[w]`` holds every ``v`` with ``w <= v``; it is the reflexive-transitive
    closure of the generating edges.  ``succ`` is ``None`` for a bare frame.
    """

    worlds: tuple
    up: dict
    labels: dict
    succ: frozenset | None = None
    sigma: Closure = field(init=False)

    def __post_init__(self):
        if not self.worlds:
            raise StructureError("a structure needs at least one world")
        sigmas = {t.sigma for t in self.labels.values()}
        if len(sigmas) != 1:
            raise StructureError("labels must all be types over one closure")
        missing = [w for w in self.worlds if w not in self.labels]
        if missing:
            raise StructureError(f"unlabelled worlds: {missing}")
        self.sigma = next(iter(sigmas))

    @classmethod
    def build(cls, worlds: Iterable[World], order: Iterable[tuple], labels: Mapping,
              succ: Iterable[tuple] | None = None) -> "LabelledStructure":
        worlds = tuple(worlds)
        ws = set(worlds)
        order = list(order)
        for a, b in order:
            if a not in ws or b not in ws:
                raise StructureError(f"order edge mentions unknown world: {a} {b}")
        if succ is not None:
            succ = frozenset(succ)
            for a, b in succ:
                if a not in ws or b not in ws:
                    raise StructureError(f"succ edge mentions unknown world: {a} {b}")
        up = {w: frozenset(s) for w, s in _reflexive_transitive(worlds, order).items()}
        return cls(worlds, up, dict(labels), succ)

    def leq(self, a, b) -> bool:
        return b in self.up[a]

    def successors(self) -> dict:
        out = {w: [] for w in self.worlds}
        for a, b in self.succ or ():
            out[a].append(b)
        return out

    def order_pairs(self):
        return [(a, b) for a in self.worlds for b in self.worlds if b in self.up[a]]


def validate_frame(x: LabelledStructure) -> list[Violation]:
    """Partial order, monotone labels, and witnesses for refuted implications."""
    out = []
    for a in x.worlds:
        for b in x.up[a]:
            if a != b and a in x.up[b]:
                if repr(a) < repr(b):
                    out.append(Violation("antisymmetry", (a, b)))
    ci = info(x.sigma)
    for a in x.worlds:
        la = x.labels[a].pos
        for b in x.up[a]:
            if la & ~x.labels[b].pos:
                out.append(Violation("frame (a)", (a, b), "label not monotone"))
    for w in x.worlds:
        pos = x.labels[w].pos
        for imp, left, right in ci.implications:
            if pos >> imp & 1:
                continue
            if not any((x.labels[v].pos >> left & 1) and not (x.labels[v].pos >> right & 1)
                       for v in x.up[w]):
                out.append(Violation("frame (b)", (w,),
                                     f"no witness above for {render(x.sigma[imp])}"))
    return out


@dataclass(frozen=True)
class Classification:
    kind: str
    diagnostics: tuple[Violation, ...] = ()

    def at_least(self, kind: str) -> bool:
        rank = {FRAME: 0, WEAK: 1, QUASIMODEL: 2}
        return rank[self.kind] >= rank[kind]


def reachable_from(x: LabelledStructure, w) -> set:
    """Worlds reachable from ``w`` in zero or more successor steps."""
    if w not in x.up:
        raise StructureError(f"unknown world {w!r}")
    succ = x.successors()
    seen = {w}
    queue = deque([w])
    while queue:
        a = queue.popleft()
        for b in succ[a]:
            if b not in seen:
                seen.add(b)
                queue.append(b)
    return seen


def _fulfilling(x: LabelledStructure, target: set) -> set:
    """Worlds from which some world of ``target`` is reachable."""
    pred = {w: [] for w in x.worlds}
    for a, b in x.succ or ():
        pred[b].append(a)
    seen = set(target)
    queue = deque(target)
    while queue:
        b = queue.popleft()
        for a in pred[b]:
            if a not in seen:
                seen.add(a)
                queue.append(a)
    return seen


def _confluence_violations(x: LabelledStructure) -> list[Violation]:
    succ = x.successors()
    out = []
    for w in x.worlds:
        for v in succ[w]:
            for w2 in x.up[w]:
                if not any(v2 in x.up[v] for v2 in succ[w2]):
                    out.append(Violation("forward confluence", (w, w2, v)))
    return out


def classify(x: LabelledStructure) -> Classification:
    """Strongest of frame / weak quasimodel / quasimodel that ``x`` satisfies.

    A structure that fails even the frame conditions raises.
    """
    problems = validate_frame(x)
    if problems:
        raise StructureError("not a labelled frame: " + "; ".join(map(str, problems)))
    if x.succ is None:
        return Classification(FRAME, (Violation("no successor relation", ()),))

    ci = info(x.sigma)
    weak_problems = _confluence_violations(x)
    for a, b in sorted(x.succ, key=repr):
        if not _st(ci, x.labels[a].pos, x.labels[b].pos):
            weak_problems.append(Violation("sensibility", (a, b)))
    if weak_problems:
        return Classification(FRAME, tuple(weak_problems))

    qm_problems = []
    succ = x.successors()
    for w in x.worlds:
        if not succ[w]:
            qm_problems.append(Violation("seriality", (w,)))
    for ev, sub in ci.eventualities:
        target = {w for w in x.worlds if x.labels[w].pos >> sub & 1}
        good = _fulfilling(x, target)
        for w in x.worlds:
            if x.labels[w].pos >> ev & 1 and w not in good:
                qm_problems.append(Violation("omega-sensibility", (w,),
                                             f"{render(x.sigma[ev])} never fulfilled"))
    if qm_problems:
        return Classification(WEAK, tuple(qm_problems))
    return Classification(QUASIMODEL)


def restrict(x: LabelledStructure, u: Iterable) -> LabelledStructure:
    u = set(u)
    if not u:
        raise StructureError("cannot restrict to the empty set")
    unknown = u - set(x.worlds)
    if unknown:
        raise StructureError(f"unknown worlds: {sorted(map(str, unknown))}")
    worlds = tuple(w for w in x.worlds if w in u)
    up = {w: frozenset(v for v in x.up[w] if v in u) for w in worlds}
    succ = None if x.succ is None else frozenset((a, b) for a, b in x.succ if a in u and b in u)
    return LabelledStructure(worlds, up, {w: x.labels[w] for w in worlds}, succ)


def falsifies(x: LabelledStructure, f: Formula) -> list:
    """Worlds whose label puts ``f`` on the negative side."""
    if f not in x.sigma.index:
        raise StructureError(f"{render(f)} is not in the closure of the structure")
    i = x.sigma.index[f]
    return [w for w in x.worlds if not x.labels[w].pos >> i & 1]


# ------------------------------------------------------------ file format

def parse_structure(text: str) -> LabelledStructure:
    """Read the line-oriented structure format.

    ``sigma f ; g ; ...`` declares the closure (of the listed formulas);
    then ``world``, ``order``, ``succ``, ``label+`` and ``label-`` lines.
    A file without ``succ`` lines describes a bare frame.
    """
    sigma = None
    worlds, order, succ = [], [], []
    pos: dict = {}
    neg: dict = {}
    saw_succ = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if head == "sigma":
                roots = [parse(part) for part in rest.split(";") if part.strip()]
                sigma = Closure(roots)
            elif head == "world":
                if rest in worlds:
                    raise StructureError(f"duplicate world {rest}")
                worlds.append(rest)
            elif head in ("order", "succ"):
                a, b = rest.split()
                (order if head == "order" else succ).append((a, b))
                saw_succ |= head == "succ"
            elif head in ("label+", "label-"):
                w, _, ftext = rest.partition(" ")
                (pos if head == "label+" else neg).setdefault(w, []).append(parse(ftext))
            else:
                raise StructureError(f"unknown directive {head!r}")
        except (ValueError, StructureError) as e:
            raise StructureError(f"line {lineno}: {e}") from e
    if sigma is None:
        raise StructureError("missing sigma header")
    labels = {}
    for w in worlds:
        try:
            labels[w] = TwoSidedType.from_sides(sigma, neg.get(w, ()), pos.get(w, ()))
        except InvalidType as e:
            raise StructureError(f"world {w}: {e}") from e
    return LabelledStructure.build(worlds, order, labels, succ if saw_succ else None)


def format_structure(x: LabelledStructure, roots: Iterable[Formula] | None = None,
                     comments: Iterable[str] = ()) -> str:
    """Write ``x`` in the structure format; order lines list the full order."""
    lines = [f"# {c}" for c in comments]
    roots = list(roots) if roots is not None else _maximal(x.sigma)
    lines.append("sigma " + " ; ".join(render(f) for f in roots))
    for w in x.worlds:
        lines.append(f"world {w}")
    for a in x.worlds:
        for b in x.worlds:
            if a != b and b in x.up[a]:
                lines.append(f"order {a} {b}")
    for a, b in sorted(x.succ or (), key=lambda p: (x.worlds.index(p[0]), x.worlds.index(p[1]))):
        lines.append(f"succ {a} {b}")
    for w in x.worlds:
        t = x.labels[w]
        for i, f in enumerate(x.sigma):
            lines.append(f"label{'+' if t.pos >> i & 1 else '-'} {w} {render(f)}")
    return "\n".join(lines) + "\n"


def _maximal(sigma: Closure) -> list[Formula]:
    inner = set()
    for f in sigma:
        inner.update(f.children())
    return [f for f in sigma if f not in inner]


def describe_type(t: TwoSidedType) -> str:
    return format_type(t)

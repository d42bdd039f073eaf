"""Two-sided types over a finite closure and the temporal relation between them."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable

from .formula import (And, Bottom, Closure, Eventually, Formula, Henceforth,
                      Implies, Next, Or, parse, render)

__all__ = ["InvalidType", "TwoSidedType", "enumerate_types", "type_leq", "parse_type",
           "type_sub", "st_related", "format_type", "ClosureInfo", "info"]


class InvalidType(ValueError):
    """Raised for ill-formed types or mismatched closures."""


class ClosureInfo:
    """Index tables for a closure, shared by all types over it."""

    def __init__(self, sigma: Closure):
        self.sigma = sigma
        self.full = (1 << len(sigma)) - 1
        idx = sigma.index
        self.nexts: list[tuple[int, int]] = []       # (index of X a, index of a)
        self.eventualities: list[tuple[int, int]] = []  # (index of F a, index of a)
        self.implications: list[tuple[int, int, int]] = []  # (a -> b, a, b)
        for i, f in enumerate(sigma):
            if isinstance(f, Next):
                self.nexts.append((i, idx[f.sub]))
            elif isinstance(f, Eventually):
                self.eventualities.append((i, idx[f.sub]))
            elif isinstance(f, Implies):
                self.implications.append((i, idx[f.left], idx[f.right]))
        self.temporal = bool(self.nexts or self.eventualities)


@lru_cache(maxsize=None)
def info(sigma: Closure) -> ClosureInfo:
    return ClosureInfo(sigma)


def _bit(i: int) -> int:
    return 1 << i


def _check_positive_set(sigma: Closure, pos: int) -> str | None:
    """Return the first violated type condition, or None."""
    idx = sigma.index
    for i, f in enumerate(sigma):
        here = pos >> i & 1
        if isinstance(f, Bottom) and here:
            return "(c) false is positive"
        if isinstance(f, Henceforth):
            return f"G-formula {render(f)} in closure"
        if isinstance(f, And):
            want = (pos >> idx[f.left] & 1) and (pos >> idx[f.right] & 1)
            if here != want:
                return f"(d) conjunction {render(f)}"
        elif isinstance(f, Or):
            want = (pos >> idx[f.left] & 1) or (pos >> idx[f.right] & 1)
            if here != want:
                return f"(e) disjunction {render(f)}"
        elif isinstance(f, Implies):
            if here and (pos >> idx[f.left] & 1) and not (pos >> idx[f.right] & 1):
                return f"(f) implication {render(f)}"
        elif isinstance(f, Eventually):
            if not here and (pos >> idx[f.sub] & 1):
                return f"(g) eventuality {render(f)}"
    return None


class TwoSidedType:
    """A partition (negative; positive) of a closure.

    Stored as a bitmask of the positive members, indexed by closure order.
    Construct through :meth:`from_positive` or :func:`enumerate_types`;
    both reject partitions that violate the type conditions.
    """

    __slots__ = ("sigma", "pos", "_hash")

    def __init__(self, sigma: Closure, pos: int):
        self.sigma = sigma
        self.pos = pos
        self._hash = hash((sigma, pos))

    @classmethod
    def from_positive(cls, sigma: Closure, positive: Iterable[Formula]) -> "TwoSidedType":
        pos = 0
        for f in positive:
            if f not in sigma.index:
                raise InvalidType(f"{render(f)} is not in the closure")
            pos |= _bit(sigma.index[f])
        problem = _check_positive_set(sigma, pos)
        if problem:
            raise InvalidType(f"not a two-sided type: {problem}")
        return cls(sigma, pos)

    @classmethod
    def from_sides(cls, sigma: Closure, negative: Iterable[Formula],
                   positive: Iterable[Formula]) -> "TwoSidedType":
        negative, positive = set(negative), set(positive)
        if negative & positive:
            raise InvalidType("(a) sides overlap: " + ", ".join(render(f) for f in negative & positive))
        missing = set(sigma.formulas) - negative - positive
        if missing:
            raise InvalidType("(b) sides do not cover the closure: " + ", ".join(render(f) for f in missing))
        extra = (negative | positive) - set(sigma.formulas)
        if extra:
            raise InvalidType("formulas outside the closure: " + ", ".join(render(f) for f in extra))
        return cls.from_positive(sigma, positive)

    @property
    def neg(self) -> int:
        return info(self.sigma).full & ~self.pos

    @property
    def positive(self) -> frozenset[Formula]:
        return frozenset(f for i, f in enumerate(self.sigma) if self.pos >> i & 1)

    @property
    def negative(self) -> frozenset[Formula]:
        return frozenset(f for i, f in enumerate(self.sigma) if not self.pos >> i & 1)

    def is_positive(self, f: Formula) -> bool:
        return bool(self.pos >> self.sigma.index[f] & 1)

    def is_negative(self, f: Formula) -> bool:
        return not self.pos >> self.sigma.index[f] & 1

    def __eq__(self, other) -> bool:
        return (isinstance(other, TwoSidedType) and self.pos == other.pos
                and self.sigma == other.sigma)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"TwoSidedType({format_type(self)})"


def format_type(t: TwoSidedType) -> str:
    """Textual form ``+{a, b} -{c}`` listing members in closure order."""
    pos = ", ".join(render(f) for i, f in enumerate(t.sigma) if t.pos >> i & 1)
    neg = ", ".join(render(f) for i, f in enumerate(t.sigma) if not t.pos >> i & 1)
    return f"+{{{pos}}} -{{{neg}}}"


def parse_type(sigma: Closure, text: str) -> TwoSidedType:
    """Inverse of :func:`format_type`."""
    text = text.strip()
    if not text.startswith("+{") or "} -{" not in text or not text.endswith("}"):
        raise InvalidType(f"malformed type text: {text!r}")
    pos_text, neg_text = text[2:-1].split("} -{", 1)

    def members(s):
        return [parse(part) for part in _split_top(s)] if s.strip() else []
    return TwoSidedType.from_sides(sigma, members(neg_text), members(pos_text))


def _split_top(s: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


@lru_cache(maxsize=256)
def _enumerate(sigma: Closure) -> tuple[TwoSidedType, ...]:
    idx = sigma.index
    forms = sigma.formulas
    for f in forms:
        if isinstance(f, Henceforth):
            raise InvalidType(f"closure contains the G-formula {render(f)}")
    results: list[int] = []

    # members come after their subformulas, so every condition can be
    # checked when the member itself is decided
    def go(i: int, pos: int) -> None:
        if i == len(forms):
            results.append(pos)
            return
        f = forms[i]
        b = _bit(i)
        if isinstance(f, Bottom):
            options = (0,)
        elif isinstance(f, And):
            options = (b if (pos >> idx[f.left] & 1) and (pos >> idx[f.right] & 1) else 0,)
        elif isinstance(f, Or):
            options = (b if (pos >> idx[f.left] & 1) or (pos >> idx[f.right] & 1) else 0,)
        elif isinstance(f, Implies):
            allowed = not (pos >> idx[f.left] & 1) or (pos >> idx[f.right] & 1)
            options = (0, b) if allowed else (0,)
        elif isinstance(f, Eventually):
            options = (b,) if pos >> idx[f.sub] & 1 else (0, b)
        else:
            options = (0, b)
        for o in options:
            go(i + 1, pos | o)

    go(0, 0)
    return tuple(TwoSidedType(sigma, p) for p in results)


def enumerate_types(sigma: Closure) -> list[TwoSidedType]:
    """All two-sided types over ``sigma``, ordered by positive bitmask."""
    return sorted(_enumerate(sigma), key=lambda t: t.pos)


def _same_sigma(a: TwoSidedType, b: TwoSidedType) -> None:
    if a.sigma != b.sigma:
        raise InvalidType("types over different closures")


def type_leq(a: TwoSidedType, b: TwoSidedType) -> bool:
    """The intuitionistic order: positive part grows."""
    _same_sigma(a, b)
    return a.pos & ~b.pos == 0


def type_sub(a: TwoSidedType, b: TwoSidedType) -> bool:
    """``a`` over Sigma is contained side-wise in ``b`` over a larger Delta."""
    if not a.sigma.issubset(b.sigma):
        raise InvalidType("first closure is not contained in the second")
    bidx = b.sigma.index
    for i, f in enumerate(a.sigma):
        if (a.pos >> i & 1) != (b.pos >> bidx[f] & 1):
            return False
    return True


def st_related(a: TwoSidedType, b: TwoSidedType) -> bool:
    """Temporal compatibility: may a type with label ``b`` follow ``a``?"""
    _same_sigma(a, b)
    return _st(info(a.sigma), a.pos, b.pos)


def _st(ci: ClosureInfo, p: int, q: int) -> bool:
    for nx, sub in ci.nexts:
        if (p >> nx & 1) != (q >> sub & 1):
            return False
    for ev, sub in ci.eventualities:
        if p >> ev & 1:
            if not p >> sub & 1 and not q >> ev & 1:
                return False
        elif q >> ev & 1:
            return False
    return True

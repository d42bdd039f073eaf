"""Abstract syntax, parsing, printing and subformula closures.

Formulas are immutable, hashable trees compared structurally.  Derived
connectives never appear as nodes: ``~a`` is ``a -> false``, ``true`` is
``false -> false`` and ``a <-> b`` is ``(a -> b) & (b -> a)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Bottom", "Atom", "And", "Or", "Implies", "Next", "Eventually",
    "Henceforth", "BOTTOM", "TOP", "neg", "iff", "conj", "disj",
    "ParseError", "parse", "render", "Closure", "closure", "is_box_free",
    "atoms", "size",
]


class Formula:
    __slots__ = ("_hash",)

    # precedence used by the printer; higher binds tighter
    prec = 5

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __hash__(self) -> int:
        try:
            return self._hash
        except AttributeError:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_hash", h)
            return h

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def _key(self) -> tuple:
        return self.children()

    def __str__(self) -> str:
        return render(self)


class Bottom(Formula):
    __slots__ = ()

    def __repr__(self):
        return "Bottom"


class Atom(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)

    def __repr__(self):
        return f"Atom({self.name})"


class _Binary(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"


class _Unary(Formula):
    __slots__ = ("sub",)
    prec = 4

    def __init__(self, sub: Formula):
        object.__setattr__(self, "sub", sub)

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"{type(self).__name__}({self.sub!r})"


class And(_Binary):
    __slots__ = ()
    prec = 3


class Or(_Binary):
    __slots__ = ()
    prec = 2


class Implies(_Binary):
    __slots__ = ()
    prec = 1


class Next(_Unary):
    __slots__ = ()


class Eventually(_Unary):
    __slots__ = ()


class Henceforth(_Unary):
    __slots__ = ()


BOTTOM = Bottom()
TOP = Implies(BOTTOM, BOTTOM)


def neg(f: Formula) -> Formula:
    return Implies(f, BOTTOM)


def iff(a: Formula, b: Formula) -> Formula:
    return And(Implies(a, b), Implies(b, a))


def conj(fs: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``false``."""
    fs = list(fs)
    if not fs:
        return BOTTOM
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected: Iterable[str] = ()):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<op><->|->|[&|~()XFG])
  | (?P<ident>[a-z][A-Za-z0-9_]*)
""", re.VERBOSE)

_KEYWORDS = {"true", "false"}
_ATOM_START = {"atom", "false", "true", "(", "~", "X", "F", "G"}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        col = pos - line_start + 1
        if kind == "op":
            toks.append(_Tok(s, s, line, col))
        elif kind == "ident":
            toks.append(_Tok(s if s in _KEYWORDS else "atom", s, line, col))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected):
        t = self.peek()
        what = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(f"unexpected {what}", t.line, t.col, expected)

    def parse(self) -> Formula:
        f = self.imp()
        if self.peek().kind != "eof":
            self.fail({"&", "|", "->", "<->", "end of input"})
        return f

    def imp(self) -> Formula:
        left = self.disj()
        op = self.peek().kind
        if op not in ("->", "<->"):
            return left
        # right-associative chain of a single operator kind
        operands = [left]
        while self.peek().kind == op:
            self.take()
            operands.append(self.disj())
        if self.peek().kind in ("->", "<->"):
            t = self.peek()
            raise ParseError("'->' and '<->' cannot be mixed without parentheses",
                             t.line, t.col, {op, "(", ")"})
        out = operands[-1]
        for f in reversed(operands[:-1]):
            out = Implies(f, out) if op == "->" else iff(f, out)
        return out

    def disj(self) -> Formula:
        out = self.conj()
        while self.peek().kind == "|":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self) -> Formula:
        out = self.unary()
        while self.peek().kind == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "X":
            self.take()
            return Next(self.unary())
        if t.kind == "F":
            self.take()
            return Eventually(self.unary())
        if t.kind == "G":
            self.take()
            return Henceforth(self.unary())
        if t.kind == "~":
            self.take()
            return neg(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        t = self.peek()
        if t.kind == "atom":
            self.take()
            return Atom(t.text)
        if t.kind == "false":
            self.take()
            return BOTTOM
        if t.kind == "true":
            self.take()
            return TOP
        if t.kind == "(":
            self.take()
            f = self.imp()
            if self.peek().kind != ")":
                self.fail({")", "&", "|", "->", "<->"})
            self.take()
            return f
        self.fail(_ATOM_START)


def parse(text: str) -> Formula:
    """Parse ``text`` in the ASCII formula grammar.

    >>> parse("p -> q -> r")
    Implies(Atom(p), Implies(Atom(q), Atom(r)))
    """
    return _Parser(text).parse()


# ---------------------------------------------------------------- printing

_UNARY_SYMBOL = {Next: "X", Eventually: "F", Henceforth: "G"}
_BINARY_SYMBOL = {And: "&", Or: "|", Implies: "->"}


def _prec(f: Formula) -> int:
    return 5 if f == TOP else f.prec


def render(f: Formula) -> str:
    """Print with the fewest parentheses that still parse back to ``f``."""
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Atom):
        return f.name
    if f == TOP:
        return "true"
    if isinstance(f, _Unary):
        inner = render(f.sub)
        if _prec(f.sub) < 4:
            inner = f"({inner})"
        return f"{_UNARY_SYMBOL[type(f)]} {inner}"
    left, right = render(f.left), render(f.right)
    p = f.prec
    if isinstance(f, Implies):
        # right-associative
        if _prec(f.left) <= p:
            left = f"({left})"
        if _prec(f.right) < p:
            right = f"({right})"
    else:
        # left-associative
        if _prec(f.left) < p:
            left = f"({left})"
        if _prec(f.right) <= p:
            right = f"({right})"
    return f"{left} {_BINARY_SYMBOL[type(f)]} {right}"


# ---------------------------------------------------------------- closures

def _postorder(f: Formula, seen: set, out: list) -> None:
    if f in seen:
        return
    for c in f.children():
        _postorder(c, seen, out)
    seen.add(f)
    out.append(f)


class Closure:
    """A finite subformula-closed set with a fixed topological order.

    Members are indexed so that every subformula precedes the formulas
    containing it.  Two closures are equal when they list the same formulas
    in the same order.
    """

    __slots__ = ("formulas", "index", "_hash")

    def __init__(self, roots: Iterable[Formula]):
        out: list[Formula] = []
        seen: set = set()
        for r in roots:
            _postorder(r, seen, out)
        self.formulas: tuple[Formula, ...] = tuple(out)
        self.index: dict[Formula, int] = {f: i for i, f in enumerate(out)}
        self._hash = hash(self.formulas)

    def __len__(self) -> int:
        return len(self.formulas)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.formulas)

    def __contains__(self, f) -> bool:
        return f in self.index

    def __getitem__(self, i: int) -> Formula:
        return self.formulas[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Closure) and (
            self is other or self.formulas == other.formulas)

    def __hash__(self) -> int:
        return self._hash

    def issubset(self, other: "Closure") -> bool:
        return all(f in other.index for f in self.formulas)

    def __repr__(self) -> str:
        return "Closure{" + ", ".join(render(f) for f in self.formulas) + "}"


def closure(*roots: Formula) -> Closure:
    """sub(f) for one or more formulas, subformulas first."""
    return Closure(roots)


def is_box_free(f: Formula) -> bool:
    if isinstance(f, Henceforth):
        return False
    return all(is_box_free(c) for c in f.children())


def atoms(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.name}
    out: set[str] = set()
    for c in f.children():
        out |= atoms(c)
    return out


def size(f: Formula) -> int:
    """Number of nodes in the syntax tree."""
    return 1 + sum(size(c) for c in f.children())

"""Hilbert-style derivations for the diamond fragment.

A proof is a numbered list of lines, each an axiom instance or a rule
application to earlier lines.  Scheme A1 (every intuitionistic tautology)
is checked by abstracting maximal modal subformulas and running the
propositional prover.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .formula import (BOTTOM, And, Eventually, Formula, Implies, Next, Or, ParseError,
                      is_box_free, parse, render)
from .ipc import abstract_modal_atoms, ipc_valid

__all__ = ["ProofLine", "Proof", "ProofError", "match_axiom", "check_proof",
           "parse_proof", "format_proof", "bundled_proofs", "load_bundled", "SCHEMES"]


class _Meta(Formula):
    """Metavariable inside an axiom pattern."""

    __slots__ = ("name",)

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)

    def _key(self):
        return (self.name,)


_A, _B = _Meta("phi"), _Meta("psi")

SCHEMES: dict[str, Formula] = {
    "A2": Implies(Next(BOTTOM), BOTTOM),
    "A3": Implies(And(Next(_A), Next(_B)), Next(And(_A, _B))),
    "A4": Implies(Next(Or(_A, _B)), Or(Next(_A), Next(_B))),
    "A5": Implies(Next(Implies(_A, _B)), Implies(Next(_A), Next(_B))),
    "A6": Implies(Or(_A, Next(Eventually(_A))), Eventually(_A)),
}


def _match(pattern: Formula, f: Formula, binding: dict) -> bool:
    if isinstance(pattern, _Meta):
        if pattern.name in binding:
            return binding[pattern.name] == f
        binding[pattern.name] = f
        return True
    if type(pattern) is not type(f):
        return False
    pk, fk = pattern.children(), f.children()
    if not pk:
        return pattern == f
    return all(_match(a, b, binding) for a, b in zip(pk, fk))


def match_axiom(f: Formula, scheme: str) -> bool:
    """Is ``f`` an instance of scheme A2..A6?"""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    return is_box_free(f) and _match(SCHEMES[scheme], f, {})


@dataclass(frozen=True)
class ProofLine:
    index: int
    formula: Formula
    rule: str                      # A1..A6, MP, NEC, DIST, IND
    refs: tuple[int, ...] = ()

    def justification(self) -> str:
        return " ".join([self.rule, *map(str, self.refs)])


@dataclass(frozen=True)
class Proof:
    lines: tuple[ProofLine, ...]

    @property
    def conclusion(self) -> Formula:
        return self.lines[-1].formula


class ProofError(ValueError):
    """First failing line; ``reason`` is a short machine-readable code."""

    def __init__(self, line: int, reason: str, detail: str = ""):
        self.line = line
        self.reason = reason
        self.detail = detail
        super().__init__(f"line {line}: {reason}" + (f" ({detail})" if detail else ""))


_ARITY = {"MP": 2, "NEC": 1, "DIST": 1, "IND": 1}
_AXIOMS = {"A1", "A2", "A3", "A4", "A5", "A6"}


def check_proof(proof: Proof) -> Formula:
    """Check every line; return the conclusion or raise :class:`ProofError`."""
    if not proof.lines:
        raise ProofError(0, "empty-proof")
    seen: dict[int, Formula] = {}
    for k, line in enumerate(proof.lines, 1):
        if line.index != k:
            raise ProofError(line.index, "bad-numbering", f"expected line {k}")
        f = line.formula
        if not is_box_free(f):
            raise ProofError(k, "box-formula")
        if line.rule in _AXIOMS:
            if line.refs:
                raise ProofError(k, "bad-reference", "axioms take no premises")
            if line.rule == "A1":
                skeleton, _ = abstract_modal_atoms(f)
                if not ipc_valid(skeleton):
                    raise ProofError(k, "not-a-tautology", render(skeleton))
            elif not match_axiom(f, line.rule):
                raise ProofError(k, "scheme-mismatch", line.rule)
        elif line.rule in _ARITY:
            if len(line.refs) != _ARITY[line.rule]:
                raise ProofError(k, "bad-reference", f"{line.rule} takes {_ARITY[line.rule]} premises")
            for r in line.refs:
                if r not in seen:
                    raise ProofError(k, "bad-reference", f"line {r} is not an earlier line")
            prem = [seen[r] for r in line.refs]
            if not _rule_ok(line.rule, prem, f):
                raise ProofError(k, "rule-mismatch", line.rule)
        else:
            raise ProofError(k, "unknown-rule", line.rule)
        seen[k] = f
    return proof.conclusion


def _rule_ok(rule: str, prem: list[Formula], f: Formula) -> bool:
    if rule == "MP":
        return prem[1] == Implies(prem[0], f)
    if rule == "NEC":
        return f == Next(prem[0])
    p = prem[0]
    if not isinstance(p, Implies):
        return False
    if rule == "DIST":
        return f == Implies(Eventually(p.left), Eventually(p.right))
    # IND: from X a -> a conclude F a -> a
    return (isinstance(p.left, Next) and p.left.sub == p.right
            and f == Implies(Eventually(p.right), p.right))


# ------------------------------------------------------------ file format

def parse_proof(text: str) -> Proof:
    """Lines ``<index> <rule> [refs] <formula>``; blank lines and ``#`` comments ignored."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.strip()
        if not body or body.startswith("#"):
            continue
        parts = body.split(None, 2)
        if len(parts) < 3 or not parts[0].isdigit():
            raise ProofError(lineno, "malformed-line", raw.strip())
        index, rule, rest = int(parts[0]), parts[1].upper(), parts[2]
        refs: list[int] = []
        for _ in range(_ARITY.get(rule, 0)):
            head, _, rest = rest.partition(" ")
            if not head.isdigit():
                raise ProofError(index, "malformed-line", "missing line reference")
            refs.append(int(head))
        try:
            f = parse(rest)
        except ParseError as e:
            raise ProofError(index, "unparsable-formula", str(e)) from e
        lines.append(ProofLine(index, f, rule, tuple(refs)))
    return Proof(tuple(lines))


def format_proof(proof: Proof) -> str:
    return "".join(f"{ln.index} {ln.justification()} {render(ln.formula)}\n" for ln in proof.lines)


BUNDLED = ("next_and.proof", "next_or.proof", "eventually_unfold.proof")


def bundled_proofs() -> dict[str, str]:
    """Name to text of the proofs shipped with the package."""
    root = resources.files("itl") / "proofs"
    return {name: (root / name).read_text() for name in BUNDLED}


def load_bundled(name: str) -> Proof:
    return parse_proof(bundled_proofs()[name])

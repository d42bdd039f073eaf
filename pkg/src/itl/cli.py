"""Command-line front end: ``itl <verb> ...``.

Exit codes: 0 affirmative, 2 negative, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .decide import decide_sat, decide_valid, oracle_falsifiable
from .formula import Formula, ParseError, closure, parse, render
from .moments import BudgetExceeded, default_budget, generate_irr, irr_bound
from .proofcheck import ProofError, check_proof, parse_proof
from .semantics import ModelError, parse_model, truth_sets
from .simulation import sim_formula
from .structures import StructureError, format_structure, parse_structure
from .typesys import InvalidType, format_type

OK, NEGATIVE, ERROR = 0, 2, 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _tree(f: Formula, indent: str = "") -> list[str]:
    name = type(f).__name__
    if hasattr(f, "name"):
        name += f" {f.name}"
    lines = [indent + name]
    for c in f.children():
        lines += _tree(c, indent + "  ")
    return lines


def _tree_json(f: Formula):
    node = {"node": type(f).__name__}
    if hasattr(f, "name"):
        node["name"] = f.name
    if f.children():
        node["children"] = [_tree_json(c) for c in f.children()]
    return node


# ------------------------------------------------------------ verbs
# each returns (exit code, text lines, json payload)

def cmd_parse(args):
    f = parse(args.formula)
    return OK, [render(f), *_tree(f)], {"formula": render(f), "ast": _tree_json(f)}


def cmd_mc(args):
    m = parse_model(Path(args.model).read_text())
    f = parse(args.formula)
    truth = truth_sets(m, [f])[f]
    if args.world is not None:
        if args.world not in m.up:
            raise ModelError([f"unknown world {args.world}"])
        val = args.world in truth
        return (OK if val else NEGATIVE), [str(val).lower()], {"world": args.world, "value": val}
    rows = {w: w in truth for w in m.worlds}
    lines = [f"{w} {str(v).lower()}" for w, v in rows.items()]
    return (OK if all(rows.values()) else NEGATIVE), lines, {"truth": rows}


def cmd_decide(args):
    f = parse(args.formula)
    run = decide_valid if args.mode == "valid" else decide_sat
    v = run(f, max_moments=args.budget)
    lines = [v.status]
    payload = {"status": v.status, "formula": render(f), "stats": v.stats}
    if v.witness is not None:
        lines.append(f"witness world {v.world} ({len(v.witness.worlds)} worlds)")
        payload["world"] = v.world
        text = format_structure(v.witness, [f], comments=[f"{v.status}: {render(f)} at {v.world}"])
        if args.witness:
            Path(args.witness).write_text(text)
        else:
            payload["witness"] = text
    lines += [f"{k}: {v.stats[k]}" for k in sorted(v.stats)]
    return (OK if v.affirmative else NEGATIVE), lines, payload


def cmd_irr(args):
    f = parse(args.sigma_of)
    sigma = closure(f)
    irr = generate_irr(sigma, max_moments=args.budget)
    sizes: dict[int, int] = {}
    for m in irr.moments:
        sizes[m.size] = sizes.get(m.size, 0) + 1
    bound = irr_bound(len(sigma))
    stats = {"closure": len(sigma), "moments": len(irr),
             "nodes": {str(k): sizes[k] for k in sorted(sizes)},
             "bound": bound}
    lines = [f"closure size {len(sigma)}", f"moments {len(irr)}",
             "bound " + (str(bound) if bound is not None else "too large to print")]
    lines += [f"  size {k}: {sizes[k]}" for k in sorted(sizes)]
    payload = {"stats": stats}
    if args.trees:
        trees = [f"m{i}\n{m.render_tree('  ')}" for i, m in enumerate(irr.moments)]
        lines += trees
        payload["trees"] = trees
    if args.dump:
        Path(args.dump).write_text(format_structure(irr.to_structure(), [f]))
    return OK, lines, payload


def cmd_sim(args):
    x = parse_structure(Path(args.frame).read_text())
    g = sim_formula(x, args.world, simplify=args.simplify)
    return OK, [render(g)], {"world": args.world, "formula": render(g)}


def cmd_check_proof(args):
    proof = parse_proof(Path(args.file).read_text())
    try:
        concl = check_proof(proof)
    except ProofError as e:
        return NEGATIVE, [f"rejected: {e}"], {"ok": False, "line": e.line, "reason": e.reason,
                                            "detail": e.detail}
    return OK, [f"ok: {render(concl)}"], {"ok": True, "conclusion": render(concl),
                                         "lines": len(proof.lines)}


def cmd_oracle(args):
    f = parse(args.formula)
    x = oracle_falsifiable(f, args.max)
    if x is None:
        return NEGATIVE, [f"none within {args.max} worlds"], {"found": False, "max": args.max}
    text = format_structure(x, [f])
    if args.dump:
        Path(args.dump).write_text(text)
    bad = [w for w in x.worlds if x.labels[w].is_negative(f)]
    lines = [f"found a quasimodel with {len(x.worlds)} worlds falsifying at {bad[0]}"]
    lines += [f"  {w}: {format_type(x.labels[w])}" for w in x.worlds]
    return OK, lines, {"found": True, "max": args.max, "world": bad[0], "witness": text}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = _Parser(prog="itl", description="Intuitionistic temporal logic toolkit.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    s = sub.add_parser("parse", parents=[common], help="show the syntax tree")
    s.add_argument("formula")
    s.set_defaults(run=cmd_parse)

    s = sub.add_parser("mc", parents=[common], help="evaluate a formula on a model file")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.add_argument("--world")
    s.set_defaults(run=cmd_mc)

    s = sub.add_parser("decide", parents=[common], help="decide validity or satisfiability")
    s.add_argument("--formula", required=True)
    s.add_argument("--mode", choices=("valid", "sat"), default="valid")
    s.add_argument("--witness", help="write the witness structure here")
    s.add_argument("--budget", type=int, help="moment budget (default: ITL_BUDGET or built-in)")
    s.set_defaults(run=cmd_decide)

    s = sub.add_parser("irr", parents=[common], help="enumerate irreducible moments")
    s.add_argument("--sigma-of", required=True, dest="sigma_of")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--stats", action="store_true")
    g.add_argument("--dump")
    g.add_argument("--trees", action="store_true")
    s.add_argument("--budget", type=int)
    s.set_defaults(run=cmd_irr)

    s = sub.add_parser("sim", parents=[common], help="simulation formula of a world")
    s.add_argument("--frame", required=True)
    s.add_argument("--world", required=True)
    s.add_argument("--simplify", action="store_true")
    s.set_defaults(run=cmd_sim)

    s = sub.add_parser("check-proof", parents=[common], help="check a Hilbert proof file")
    s.add_argument("file")
    s.set_defaults(run=cmd_check_proof)

    s = sub.add_parser("oracle", parents=[common], help="brute-force quasimodel search")
    s.add_argument("--formula", required=True)
    s.add_argument("--max", type=int, required=True)
    s.add_argument("--dump")
    s.set_defaults(run=cmd_oracle)
    return p


def run(argv: list[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    want_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "budget", None) is None and hasattr(args, "budget"):
            args.budget = default_budget()
        code, lines, payload = args.run(args)
    except (UsageError, ParseError, StructureError, ModelError, ProofError, InvalidType,
            BudgetExceeded, ValueError, KeyError, OSError) as e:
        msg = str(e) if not isinstance(e, KeyError) else f"unknown name {e}"
        if want_json:
            out.write(json.dumps({"exit": ERROR, "error": msg}, sort_keys=True) + "\n")
        err.write(f"error: {msg}\n")
        return ERROR
    if args.json:
        envelope = {"verb": args.verb, "exit": code, "result": payload}
        out.write(json.dumps(envelope, sort_keys=True, default=str) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return code


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

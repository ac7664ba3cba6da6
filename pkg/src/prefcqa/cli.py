"""Command-line front end: ``prefcqa <command> [options]``.

Every command prints either a versioned JSON document (``--format json``,
the default) or tab-delimited text rows whose first column names the row
kind.  ``--figure PATH`` additionally renders the relevant hypergraph and
repairs to an image file.

Exit status is 0 when the command ran (whatever verdict it reports), 2 on
malformed input and 3 when repair enumeration exceeds ``--max-repairs``.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Sequence

from .conflicts import repair_defect
from .context import Context
from .errors import EnumerationLimitError, ParseError, PrefCQAError
from .families import Family, build_repair, is_member, preferred_repairs
from .formats import (
    format_constraints,
    format_fact,
    format_instance,
    format_priority,
    format_queries,
    parse_constraints,
    parse_instance,
    parse_priority,
    parse_queries,
    parse_query,
)
from .generators import (
    SHAPES,
    CnfFormula,
    QbfFormula,
    RandomProfile,
    counter_instance,
    counter_labels,
    parse_dimacs,
    qbf_reduction,
    random_cnf,
    random_ctx,
    random_qbf,
    sat_reduction,
)
from .model import cnf_clauses, sort_facts
from .pcqa import pcqa_generic, pcqa_single_fd
from .repairs import DEFAULT_CAP, all_repairs

FORMAT_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_LIMIT = 0, 2, 3


# --------------------------------------------------------------------------
# input


def _read(path: str, stdin=None) -> str:
    if path == "-":
        return (stdin or sys.stdin).read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def load_context(args, stdin=None) -> Context:
    """Build the prioritized context named by the common options."""
    source = "<stdin>" if args.instance == "-" else args.instance
    schema, facts = parse_instance(_read(args.instance, stdin), source)
    constraints = ()
    if args.constraints:
        constraints = parse_constraints(_read(args.constraints), args.constraints)
    pairs = []
    if args.priority:
        pairs = parse_priority(_read(args.priority), args.priority)
        unknown = [f for pair in pairs for f in pair if f not in facts]
        if unknown:
            raise ParseError(f"priority mentions {format_fact(unknown[0])}, which is not in the instance",
                             None, args.priority)
    return Context.build(facts, constraints, pairs, schema, mode=args.priority_mode)


def _facts_json(facts) -> list[str]:
    return [format_fact(f) for f in sort_facts(facts)]


# --------------------------------------------------------------------------
# commands; each returns (payload, text rows, figure request)


def cmd_conflicts(args, ctx):
    edges = ctx.hypergraph.edges
    payload = {"facts": len(ctx.instance), "conflicts": [_facts_json(e) for e in edges]}
    rows = [["conflict", *_facts_json(e)] for e in edges]
    return payload, rows, ([], "conflict hypergraph")


def cmd_repairs(args, ctx):
    reps = all_repairs(ctx, args.max_repairs)
    payload = {"count": len(reps), "repairs": [_facts_json(r) for r in reps]}
    rows = [["repair", str(k), *_facts_json(r)] for k, r in enumerate(reps, 1)]
    return payload, rows, (reps, "repair")


def cmd_preferred(args, ctx):
    fam = Family.parse(args.family)
    reps = preferred_repairs(ctx, fam, args.max_repairs)
    payload = {"family": fam.value, "count": len(reps), "repairs": [_facts_json(r) for r in reps]}
    rows = [["repair", str(k), *_facts_json(r)] for k, r in enumerate(reps, 1)]
    return payload, rows, (reps, f"{fam.value} repair")


def cmd_build(args, ctx):
    fam = Family.parse(args.family)
    r = build_repair(ctx, fam, seed=args.seed)
    payload = {"family": fam.value, "seed": args.seed, "repair": _facts_json(r)}
    return payload, [["repair", *_facts_json(r)]], ([r], f"built {fam.value} repair")


def cmd_check(args, ctx):
    fam = Family.parse(args.family)
    _, cand = parse_instance(_read(args.candidate), args.candidate)
    reason = repair_defect(cand, ctx.hypergraph)
    member = False
    if reason is None:
        member = is_member(cand, ctx, fam, args.max_repairs)
        if not member:
            reason = f"not {fam.value} optimal"
    payload = {"family": fam.value, "member": member, "reason": reason, "candidate": _facts_json(cand)}
    rows = [["verdict", "member" if member else "not member", reason or ""]]
    return payload, rows, ([cand], "candidate")


def cmd_answer(args, ctx):
    fam = Family.parse(args.family)
    named = parse_queries(_read(args.queries), args.queries) if args.queries else {}
    if args.query in named:
        name, q = args.query, named[args.query]
    else:
        name, q = None, parse_query(args.query, "--query")
    ctx.schema.check_query(q)
    if args.cnf:
        cnf_clauses(q)
    if args.tractable:
        res = pcqa_single_fd(ctx, q, fam, args.max_repairs)
    else:
        res = pcqa_generic(ctx, fam, q, args.max_repairs)
    payload = {
        "family": fam.value,
        "query": name,
        "verdict": res.verdict.value,
        "method": res.method,
        "true_witness": None if res.true_witness is None else _facts_json(res.true_witness),
        "false_witness": None if res.false_witness is None else _facts_json(res.false_witness),
    }
    rows = [["verdict", res.verdict.value, res.method]]
    witnesses = [w for w in (res.true_witness, res.false_witness) if w is not None]
    return payload, rows, (witnesses, "witness")


def _write_case(out: str, ctx: Context, queries: dict) -> list[str]:
    os.makedirs(out, exist_ok=True)
    files = {
        "instance.txt": format_instance(ctx.schema, ctx.instance),
        "constraints.txt": format_constraints(ctx.constraints),
        "priority.txt": format_priority(ctx.priority.pairs),
    }
    if queries:
        files["queries.txt"] = format_queries(queries)
    for name, text in files.items():
        with open(os.path.join(out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    return sorted(files)


def cmd_gen(args, ctx=None):
    rng = random.Random(args.seed)
    queries: dict = {}
    extra: dict = {}
    if args.kind == "counter":
        case = counter_instance(args.n)
        gctx = case.ctx
        extra["chain"] = [{"label": lab, "repair": _facts_json(r)}
                          for lab, r in zip(counter_labels(args.n), case.chain)]
    elif args.kind in ("sat", "qbf"):
        if args.dimacs:
            formula = parse_dimacs(_read(args.dimacs), args.dimacs)
        else:
            formula = random_cnf(rng) if args.kind == "sat" else random_qbf(rng)
        if args.kind == "sat":
            if isinstance(formula, QbfFormula):
                raise ParseError("expected a plain CNF, got a 'u' line", None, args.dimacs)
            case = sat_reduction(formula)
            extra["formula"] = {"vars": formula.num_vars, "clauses": [list(c) for c in formula.clauses]}
        else:
            if isinstance(formula, CnfFormula):
                raise ParseError("a QBF needs a 'u <count>' line", None, args.dimacs)
            case = qbf_reduction(formula)
            extra["formula"] = {"universal": formula.universal, "existential": formula.existential,
                                "clauses": [list(c) for c in formula.matrix.clauses]}
        gctx = case.ctx
        queries["q"] = case.query
    else:
        profile = RandomProfile(facts=args.facts, shape=args.shape, density=args.density, values=args.values)
        gctx = random_ctx(args.seed if args.seed is not None else 0, profile)
    written = _write_case(args.out, gctx, queries)
    payload = {"generator": args.kind, "out": args.out, "files": written,
               "facts": len(gctx.instance), "priority_pairs": len(gctx.priority), **extra}
    rows = [["file", os.path.join(args.out, f)] for f in written]
    return payload, rows, ([], args.kind), gctx


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--format", choices=("json", "text"), default="json", help="output style")
    out.add_argument("--seed", type=int, default=None, help="seed for randomized choices")
    out.add_argument("--figure", metavar="PNG", help="also render a figure to this file")

    data = argparse.ArgumentParser(add_help=False, parents=[out])
    data.add_argument("--instance", required=True, help="instance file, or - for stdin")
    data.add_argument("--constraints", help="constraint file (FD and DENIAL statements)")
    data.add_argument("--priority", help="priority file, one 'fact > fact' per line")
    data.add_argument("--priority-mode", choices=("strict", "lenient"), default="strict")
    data.add_argument("--max-repairs", type=int, default=DEFAULT_CAP,
                      help="fail with status 3 beyond this many repairs")

    parser = argparse.ArgumentParser(prog="prefcqa", description="Preferred repairs and consistent answers.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("conflicts", parents=[data], help="list the conflicts")
    sub.add_parser("repairs", parents=[data], help="list every repair")
    for name, text in (("preferred", "list the preferred repairs of a family"),
                       ("build", "construct one preferred repair")):
        p = sub.add_parser(name, parents=[data], help=text)
        p.add_argument("--family", default="g", help="all, g, p or c")
    p = sub.add_parser("check", parents=[data], help="test whether a fact set is a preferred repair")
    p.add_argument("--family", default="g", help="all, g, p or c")
    p.add_argument("--candidate", required=True, help="file listing the candidate facts")
    p = sub.add_parser("answer", parents=[data], help="preferred consistent answer to a closed query")
    p.add_argument("--family", default="g", help="all, g, p or c")
    p.add_argument("--query", required=True, help="a name from --queries, or query text")
    p.add_argument("--queries", help="file of 'name: query' lines")
    p.add_argument("--tractable", action="store_true", help="use the single-FD cluster test")
    p.add_argument("--cnf", action="store_true", help="require a quantifier-free CNF query")

    g = sub.add_parser("gen", parents=[out], help="write a generated instance to a directory")
    g.add_argument("kind", choices=("counter", "sat", "qbf", "random"))
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--n", type=int, default=3, help="counter width")
    g.add_argument("--dimacs", help="DIMACS file for sat or qbf (random formula if omitted)")
    g.add_argument("--shape", choices=SHAPES, default="single-fd")
    g.add_argument("--facts", type=int, default=8)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--values", type=int, default=3)
    return parser


COMMANDS = {
    "conflicts": cmd_conflicts,
    "repairs": cmd_repairs,
    "preferred": cmd_preferred,
    "build": cmd_build,
    "check": cmd_check,
    "answer": cmd_answer,
}


def _emit(args, payload, rows, stdout) -> None:
    if args.format == "json":
        doc = {"version": FORMAT_VERSION, "command": args.command, **payload}
        stdout.write(json.dumps(doc, indent=2) + "\n")
    else:
        for row in rows:
            stdout.write("\t".join(row) + "\n")


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None, stdin=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        if args.command == "gen":
            payload, rows, (shown, title), ctx = cmd_gen(args)
        else:
            ctx = load_context(args, stdin)
            payload, rows, (shown, title) = COMMANDS[args.command](args, ctx)
        if args.figure:
            from .plotting import save_figure

            save_figure(ctx, args.figure, shown, title)
            payload["figure"] = args.figure
    except EnumerationLimitError as exc:
        stderr.write(f"prefcqa: {exc}\n")
        return EXIT_LIMIT
    except (PrefCQAError, OSError) as exc:
        stderr.write(f"prefcqa: {exc}\n")
        return EXIT_INPUT
    _emit(args, payload, rows, stdout)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

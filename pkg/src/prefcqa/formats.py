"""Text formats for instances, constraints, priorities and queries.

Instance files list ``relation`` headers followed by one fact per line::

    relation Emp(Name: const, Salary: rat, Dept: const)
    Emp(John, 40000, IT)

Numbers (``12``, ``-3``, ``2.5``, ``7/3``) are exact rationals; bare words
and quoted strings are constants.  Without headers the schema is inferred.

Constraint files hold statements ending in ``;``::

    FD Emp: Name -> Name, Salary, Dept;
    DENIAL [Emp(x, y, z), Mgr(u, w, z)] WHERE y > w;

Inside constraints and queries bare words are variables, so constants
must be quoted.  Priority files have one ``fact > fact`` per line, and
query files one ``name: query`` per line.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import ParseError
from .model import (
    FALSE,
    TRUE,
    And,
    Atom,
    Attribute,
    Cmp,
    Const,
    DenialConstraint,
    Domain,
    Exists,
    Fact,
    Forall,
    FunctionalDependency,
    Not,
    Or,
    Schema,
    Shift,
    Var,
    free_vars,
    sort_facts,
)

KEYWORDS = frozenset({"relation", "fd", "denial", "where", "and", "or", "not",
                      "exists", "forall", "true", "false"})

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<string>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_$&][A-Za-z0-9_$&]*)
  | (?P<op>->|<=|>=|!=|<>|==|[=<>()\[\],;:.+\-~!¬∧∨≠≤≥∃∀])
    """,
    re.VERBOSE,
)
_IDENT = re.compile(r"[A-Za-z_$&][A-Za-z0-9_$&]*\Z")
_SYMBOLS = {"∧": "and", "∨": "or", "¬": "not", "~": "not", "!": "not", "∃": "exists", "∀": "forall"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int

    @property
    def keyword(self) -> str | None:
        if self.kind == "ident" and self.text.lower() in KEYWORDS:
            return self.text.lower()
        if self.kind == "op" and self.text in _SYMBOLS:
            return _SYMBOLS[self.text]
        return None


def tokenize(text: str, source: str | None = None, first_line: int = 1) -> list[Token]:
    out = []
    line = first_line
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, source)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line))
        pos = m.end()
    out.append(Token("eof", "", line))
    return out


def _unquote(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s[1:-1])


class _Parser:
    def __init__(self, text: str, source: str | None = None, first_line: int = 1):
        self.toks = tokenize(text, source, first_line)
        self.i = 0
        self.source = source

    # ---- token helpers ----
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{msg} (found {found})", tok.line, self.source)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at_op(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def at_kw(self, kw: str) -> bool:
        return self.tok.keyword == kw

    def expect_op(self, text: str) -> Token:
        if not self.at_op(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kw(self, kw: str) -> Token:
        if not self.at_kw(kw):
            raise self.error(f"expected {kw.upper()}")
        return self.advance()

    def expect_ident(self, what: str = "a name") -> str:
        if self.tok.kind != "ident" or self.tok.text.lower() in KEYWORDS:
            raise self.error(f"expected {what}")
        return self.advance().text

    def at_end(self) -> bool:
        return self.tok.kind == "eof"

    def expect_end(self):
        if not self.at_end():
            raise self.error("unexpected trailing input")

    # ---- values and terms ----
    def number(self) -> Fraction:
        neg = False
        if self.at_op("-"):
            self.advance()
            neg = True
        if self.tok.kind != "number":
            raise self.error("expected a number")
        v = Fraction(self.advance().text)
        return -v if neg else v

    def value(self):
        """A fact argument: number, quoted string or bare constant."""
        if self.tok.kind == "number" or self.at_op("-"):
            return self.number()
        if self.tok.kind == "string":
            return Const(_unquote(self.advance().text))
        if self.tok.kind == "ident":
            return Const(self.advance().text)
        raise self.error("expected a value")

    def term(self, allow_shift: bool = True):
        """A formula term: variable, optionally shifted, or a literal value."""
        if self.tok.kind == "number" or self.at_op("-"):
            return self.number()
        if self.tok.kind == "string":
            return Const(_unquote(self.advance().text))
        name = self.expect_ident("a variable or literal")
        if allow_shift and (self.at_op("+") or self.at_op("-")):
            sign = 1 if self.advance().text == "+" else -1
            if self.tok.kind != "number":
                raise self.error("expected a number after the arithmetic operator")
            return Shift(Var(name), sign * Fraction(self.advance().text))
        return Var(name)

    def fact(self) -> Fact:
        rel = self.expect_ident("a relation name")
        self.expect_op("(")
        vals = [self.value()]
        while self.at_op(","):
            self.advance()
            vals.append(self.value())
        self.expect_op(")")
        return Fact(rel, tuple(vals))

    def atom(self) -> Atom:
        rel = self.expect_ident("a relation name")
        self.expect_op("(")
        terms = [self.term(allow_shift=False)]
        while self.at_op(","):
            self.advance()
            terms.append(self.term(allow_shift=False))
        self.expect_op(")")
        return Atom(rel, tuple(terms))

    # ---- formulas ----
    def formula(self):
        kw = self.tok.keyword
        if kw in ("exists", "forall"):
            self.advance()
            names = [self.expect_ident("a variable")]
            while self.at_op(","):
                self.advance()
                names.append(self.expect_ident("a variable"))
            self.expect_op(".")
            body = self.formula()
            return (Exists if kw == "exists" else Forall)(tuple(names), body)
        return self.disjunction()

    def disjunction(self):
        parts = [self.conjunction()]
        while self.at_kw("or"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.at_kw("and"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        kw = self.tok.keyword
        if kw == "not":
            self.advance()
            return Not(self.unary())
        if kw in ("exists", "forall"):
            return self.formula()
        if kw == "true":
            self.advance()
            return TRUE
        if kw == "false":
            self.advance()
            return FALSE
        if self.at_op("("):
            self.advance()
            f = self.formula()
            self.expect_op(")")
            return f
        if self.tok.kind == "ident" and self.peek().kind == "op" and self.peek().text == "(":
            return self.atom()
        left = self.term()
        if self.tok.kind != "op" or self.tok.text not in ("=", "==", "!=", "<>", "≠", "<", "<=", ">", ">=", "≤", "≥"):
            raise self.error("expected a comparison operator")
        op = self.advance().text
        right = self.term()
        return Cmp(op, left, right)


# --------------------------------------------------------------------------
# instances


def parse_fact(text: str, source: str | None = None) -> Fact:
    p = _Parser(text, source)
    f = p.fact()
    p.expect_end()
    return f


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.strip():
            yield lineno, raw


def parse_instance(text: str, source: str | None = None) -> tuple[Schema, frozenset]:
    """Schema (declared or inferred) and facts from instance text."""
    decls: dict[str, list] = {}
    facts: list[tuple[int, Fact]] = []
    for lineno, line in _lines(text):
        p = _Parser(line, source, lineno)
        if p.at_end():
            continue
        if p.at_kw("relation"):
            p.advance()
            name = p.expect_ident("a relation name")
            if name in decls:
                raise ParseError(f"relation {name} declared twice", lineno, source)
            p.expect_op("(")
            attrs = []
            while True:
                aname = p.expect_ident("an attribute name")
                p.expect_op(":")
                tag = p.expect_ident("a domain (rat or const)")
                try:
                    attrs.append(Attribute(aname, Domain.parse(tag)))
                except Exception as exc:
                    raise ParseError(str(exc), lineno, source) from None
                if p.at_op(","):
                    p.advance()
                    continue
                break
            p.expect_op(")")
            p.expect_end()
            decls[name] = attrs
        else:
            f = p.fact()
            p.expect_end()
            facts.append((lineno, f))
    if not decls:
        arity: dict[str, int] = {}
        for lineno, f in facts:
            if arity.setdefault(f.relation, f.arity) != f.arity:
                raise ParseError(f"{f} has arity {f.arity}, earlier {f.relation} facts have "
                                 f"{arity[f.relation]}", lineno, source)
    try:
        schema = Schema(decls) if decls else Schema.infer(f for _, f in facts)
    except Exception as exc:
        raise ParseError(str(exc), None, source) from None
    for lineno, f in facts:
        try:
            schema.check_fact(f)
        except Exception as exc:
            raise ParseError(str(exc), lineno, source) from None
    return schema, frozenset(f for _, f in facts)


# --------------------------------------------------------------------------
# constraints


def parse_constraints(text: str, source: str | None = None) -> tuple:
    p = _Parser(text, source)
    out = []
    while not p.at_end():
        start = p.tok
        if p.at_kw("fd"):
            p.advance()
            rel = p.expect_ident("a relation name")
            p.expect_op(":")
            lhs = [p.expect_ident("an attribute")]
            while p.at_op(","):
                p.advance()
                lhs.append(p.expect_ident("an attribute"))
            p.expect_op("->")
            rhs = [p.expect_ident("an attribute")]
            while p.at_op(","):
                p.advance()
                rhs.append(p.expect_ident("an attribute"))
            out.append(FunctionalDependency(rel, tuple(lhs), tuple(rhs)))
        elif p.at_kw("denial"):
            p.advance()
            p.expect_op("[")
            atoms = [p.atom()]
            while p.at_op(","):
                p.advance()
                atoms.append(p.atom())
            p.expect_op("]")
            guard = TRUE
            if p.at_kw("where"):
                p.advance()
                guard = p.disjunction()
            try:
                out.append(DenialConstraint(tuple(atoms), guard))
            except Exception as exc:
                raise ParseError(str(exc), start.line, source) from None
        else:
            raise p.error("expected FD or DENIAL")
        p.expect_op(";")
    return tuple(out)


# --------------------------------------------------------------------------
# priorities and queries


def parse_priority(text: str, source: str | None = None) -> list[tuple[Fact, Fact]]:
    pairs = []
    for lineno, line in _lines(text):
        p = _Parser(line, source, lineno)
        if p.at_end():
            continue
        w = p.fact()
        p.expect_op(">")
        l = p.fact()
        p.expect_end()
        pairs.append((w, l))
    return pairs


def parse_query(text: str, source: str | None = None, first_line: int = 1):
    p = _Parser(text, source, first_line)
    q = p.formula()
    p.expect_end()
    loose = free_vars(q)
    if loose:
        raise ParseError(
            f"unbound identifier(s) {', '.join(sorted(loose))}; quote constants, e.g. 'John'",
            first_line, source)
    return q


def parse_queries(text: str, source: str | None = None) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = re.match(r"([A-Za-z_][A-Za-z0-9_]*)\s*:(.*)\Z", line)
        if not m:
            raise ParseError("expected 'name: query'", lineno, source)
        name = m.group(1)
        if name in out:
            raise ParseError(f"query {name} defined twice", lineno, source)
        out[name] = parse_query(m.group(2), source, lineno)
    return out


# --------------------------------------------------------------------------
# serialisation


def format_value(v, quote: bool = False) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    name = v.name
    if not quote and _IDENT.match(name) and name.lower() not in KEYWORDS:
        return name
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_fact(f: Fact) -> str:
    return f"{f.relation}({', '.join(format_value(v) for v in f.values)})"


def format_term(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Shift):
        off = t.offset
        sign = "+" if off >= 0 else "-"
        return f"{t.var.name} {sign} {format_value(abs(off))}"
    return format_value(t, quote=True)


def format_formula(f, top: bool = True) -> str:
    def wrap(g):
        s = format_formula(g, top=False)
        if isinstance(g, (Exists, Forall)) or (isinstance(g, (And, Or)) and g.parts):
            return f"({s})"
        return s

    if isinstance(f, Atom):
        return f"{f.relation}({', '.join(format_term(t) for t in f.terms)})"
    if isinstance(f, Cmp):
        return f"{format_term(f.left)} {f.op} {format_term(f.right)}"
    if isinstance(f, (And, Or)):
        if not f.parts:
            return "TRUE" if isinstance(f, And) else "FALSE"
        if len(f.parts) == 1:
            return format_formula(f.parts[0], top)
        # nested connectives and quantifiers keep their parentheses so that
        # reparsing rebuilds the same tree
        sep = " AND " if isinstance(f, And) else " OR "
        return sep.join(wrap(p) if isinstance(p, (And, Or, Exists, Forall)) else format_formula(p, False)
                        for p in f.parts)
    if isinstance(f, Not):
        if isinstance(f.body, Cmp):
            return f"NOT ({format_formula(f.body, False)})"
        return f"NOT {wrap(f.body)}"
    if isinstance(f, (Exists, Forall)):
        kw = "EXISTS" if isinstance(f, Exists) else "FORALL"
        return f"{kw} {', '.join(f.vars)} . {format_formula(f.body, True)}"
    raise TypeError(f"not a formula: {f!r}")


def format_constraint(c) -> str:
    if isinstance(c, FunctionalDependency):
        return f"FD {c.relation}: {', '.join(c.lhs)} -> {', '.join(c.rhs)};"
    atoms = ", ".join(format_formula(a) for a in c.atoms)
    if c.guard == TRUE:
        return f"DENIAL [{atoms}];"
    return f"DENIAL [{atoms}] WHERE {format_formula(c.guard)};"


def format_constraints(constraints: Iterable) -> str:
    return "".join(format_constraint(c) + "\n" for c in constraints)


def format_schema(schema: Schema) -> str:
    lines = []
    for name, attrs in sorted(schema.relations.items()):
        cols = ", ".join(f"{a.name}: {a.domain.value}" for a in attrs)
        lines.append(f"relation {name}({cols})")
    return "\n".join(lines) + ("\n" if lines else "")


def format_instance(schema: Schema, facts: Iterable[Fact]) -> str:
    return format_schema(schema) + "".join(format_fact(f) + "\n" for f in sort_facts(facts))


def format_priority(pairs: Iterable[tuple[Fact, Fact]]) -> str:
    from .model import fact_key

    ordered = sorted(pairs, key=lambda p: (fact_key(p[0]), fact_key(p[1])))
    return "".join(f"{format_fact(w)} > {format_fact(l)}\n" for w, l in ordered)


def format_queries(queries: Mapping[str, object]) -> str:
    return "".join(f"{name}: {format_formula(q)}\n" for name, q in queries.items())

"""Builders for constructed instances and random prioritized contexts.

* :func:`counter_instance` emulates an n-bit binary counter whose repairs
  form an exponentially long chain under global dominance.
* :func:`sat_reduction` encodes a CNF formula so that ``not b`` is the
  preferred answer exactly when the formula is unsatisfiable.
* :func:`qbf_reduction` encodes a forall-exists 3CNF formula so that
  ``p_exists`` is the globally preferred answer exactly when it is valid.
* :func:`random_ctx` and :func:`random_cnf_query` sample small contexts and
  queries for property tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .context import Context
from .errors import ArgumentError, ParseError
from .model import (
    Atom,
    Cmp,
    DenialConstraint,
    Fact,
    FunctionalDependency,
    Not,
    Schema,
    Shift,
    Var,
    conj,
    disj,
    fact,
    fact_key,
)


@dataclass(frozen=True)
class CnfFormula:
    """Clauses of signed variable indices (``-3`` is the negation of ``x3``)."""

    num_vars: int
    clauses: tuple

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 0:
            raise ArgumentError("variable count must be non-negative")
        for c in clauses:
            for l in c:
                if l == 0 or abs(l) > self.num_vars:
                    raise ArgumentError(f"literal {l} outside variables 1..{self.num_vars}")


@dataclass(frozen=True)
class QbfFormula:
    """``forall x1..xn exists x(n+1)..x(n+m)`` over a 3CNF matrix."""

    universal: int
    existential: int
    matrix: CnfFormula

    def __post_init__(self):
        if self.matrix.num_vars != self.universal + self.existential:
            raise ArgumentError("matrix variable count must equal universal + existential")
        for c in self.matrix.clauses:
            if len(c) != 3:
                raise ArgumentError(f"clause {c} does not have exactly three literal positions")


@dataclass(frozen=True)
class GeneratedCase:
    ctx: Context
    query: object = None
    chain: tuple = ()
    provenance: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------------
# binary counter


def _bit(i: int, c) -> Fact:
    return fact("R", i, c)


def counter_instance(n: int) -> GeneratedCase:
    """The n-bit counter instance with its documented dominance chain.

    The chain lists repairs from the largest number down, so consecutive
    entries satisfy ``chain[k]`` dominates ``chain[k + 1]``.
    """
    if n < 1:
        raise ArgumentError("counter width must be at least 1")
    schema = Schema({"R": [("A", "rat"), ("B", "rat")]})
    facts = [_bit(i, b) for i in range(n) for b in (0, 1)] + [_bit(i, 2) for i in range(n - 1)]
    i, j = Var("i"), Var("j")
    constraints = (
        FunctionalDependency("R", ("A",), ("B",)),
        DenialConstraint((Atom("R", (i, 2)), Atom("R", (j, 1))), Cmp(">", i, j)),
        DenialConstraint((Atom("R", (i, 1)), Atom("R", (j, 2))), Cmp("=", j, Shift(i, Fraction(-1)))),
    )
    prio = [(_bit(k, 1), _bit(k, 0)) for k in range(n)]
    prio += [(_bit(k, 1), _bit(k - 1, 2)) for k in range(1, n)]
    # carries start at bit 0: without R(0,2) beating R(0,1) the number 1 would
    # not lose to its carried successor
    prio += [(_bit(k, 2), _bit(m, 1)) for k in range(0, n - 1) for m in range(k + 1)]
    ctx = Context.build(facts, constraints, prio, schema)

    def number(v):
        return frozenset(_bit(k, v >> k & 1) for k in range(n))

    def carried(v):
        low = next(k for k in range(n) if not v >> k & 1)
        out = [_bit(k, 0) for k in range(low - 1)] + [_bit(low - 1, 2)]
        out += [_bit(k, v >> k & 1) for k in range(low, n)]
        return frozenset(out)

    ascending = []
    for v in range(2 ** n):
        ascending.append(number(v))
        if v % 2 == 1 and v <= 2 ** n - 3:
            ascending.append(carried(v))
    return GeneratedCase(ctx, None, tuple(reversed(ascending)), {"generator": "counter", "n": n})


def counter_labels(n: int) -> list[str]:
    """Names of the chain entries returned by :func:`counter_instance`, same order."""
    names = []
    for v in range(2 ** n):
        names.append(f"I{v}")
        if v % 2 == 1 and v <= 2 ** n - 3:
            names.append(f"I{v},c")
    return list(reversed(names))


# --------------------------------------------------------------------------
# SAT


def sat_reduction(f: CnfFormula) -> GeneratedCase:
    """Instance, priority and query ``not b`` for the complement of SAT.

    Facts over ``R(A1, B1, A2, B2)`` with ``A1 -> B1`` and ``A2 -> B2``:
    ``w_i = R(i,1,i,1)``, ``nw_i = R(i,-1,-i,1)``, ``d_j = R(n+j,0,0,1)``,
    ``v_i^j = R(n+j,1,-i,0)``, ``nv_i^j = R(n+j,1,i,0)`` and ``b = R(0,0,0,0)``.
    The clause fact ``d_j`` carries ``B1 = 0`` so that it conflicts with the
    literal facts of its clause.
    """
    if any(len(c) == 0 for c in f.clauses):
        raise ArgumentError("the reduction is undefined for a formula with an empty clause")
    n = f.num_vars
    schema = Schema({"R": [("A1", "rat"), ("B1", "rat"), ("A2", "rat"), ("B2", "rat")]})
    w = {i: fact("R", i, 1, i, 1) for i in range(1, n + 1)}
    nw = {i: fact("R", i, -1, -i, 1) for i in range(1, n + 1)}
    b = fact("R", 0, 0, 0, 0)
    facts = set(w.values()) | set(nw.values()) | {b}
    prio = set()
    for j, clause in enumerate(f.clauses, 1):
        d = fact("R", n + j, 0, 0, 1)
        facts.add(d)
        prio.add((d, b))
        for lit in clause:
            i = abs(lit)
            if lit > 0:
                v = fact("R", n + j, 1, -i, 0)
                prio.add((nw[i], v))
            else:
                v = fact("R", n + j, 1, i, 0)
                prio.add((w[i], v))
            facts.add(v)
            prio.add((v, d))
    constraints = (
        FunctionalDependency("R", ("A1",), ("B1",)),
        FunctionalDependency("R", ("A2",), ("B2",)),
    )
    ctx = Context.build(facts, constraints, prio, schema)
    query = Not(Atom("R", b.values))
    return GeneratedCase(ctx, query, (), {"generator": "sat", "formula": f})


# --------------------------------------------------------------------------
# QBF


def qbf_reduction(f: QbfFormula) -> GeneratedCase:
    """Instance, priority and query ``p_exists`` for forall-exists 3CNF validity.

    Facts over ``R(A1, B1, ..., A5, B5)`` with ``Ak -> Bk`` for k = 1..5.
    Position 1 separates universal from existential material, position 2
    makes ``v_i`` and ``nv_i`` conflict, and positions 3-5 hold one clause
    literal each: a literal fact carries its signed variable with ``B = 1``
    and the clause fact ``d_k`` carries the literal with ``B = 0``, so
    ``d_k`` conflicts exactly with the facts that satisfy one of its literals
    and never with another clause fact.
    """
    n, m = f.universal, f.existential
    attrs = []
    for k in range(1, 6):
        attrs += [(f"A{k}", "rat"), (f"B{k}", "rat")]
    schema = Schema({"R": attrs})

    def q(i):
        return 1 if i <= n else 0

    def lit_fact(lit):
        i = abs(lit)
        sign = 1 if lit > 0 else -1
        return fact("R", 0, q(i), i, sign, lit, 1, lit, 1, lit, 1)

    facts = set()
    for i in range(1, n + m + 1):
        facts.add(lit_fact(i))
        facts.add(lit_fact(-i))
    p_exists = fact("R", 0, 0, *[0] * 8)
    p_forall = fact("R", 0, 1, *[0] * 8)
    facts |= {p_exists, p_forall}
    prio = {(p_exists, p_forall)}
    for i in range(1, n + 1):
        prio.add((p_exists, lit_fact(i)))
        prio.add((p_exists, lit_fact(-i)))
    for clause in f.matrix.clauses:
        a, b, c = clause
        d = fact("R", 0, 1, 0, 0, a, 0, b, 0, c, 0)
        facts.add(d)
        for lit in clause:
            prio.add((lit_fact(lit), d))
    constraints = tuple(FunctionalDependency("R", (f"A{k}",), (f"B{k}",)) for k in range(1, 6))
    ctx = Context.build(facts, constraints, prio, schema)
    return GeneratedCase(ctx, Atom("R", p_exists.values), (), {"generator": "qbf", "formula": f})


# --------------------------------------------------------------------------
# DIMACS


def parse_dimacs(text: str, source: str | None = None) -> CnfFormula | QbfFormula:
    """Read DIMACS CNF; an extra ``u N`` line marks x1..xN universal and yields a QBF."""
    num_vars = num_clauses = None
    universal = None
    clauses, current = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("expected 'p cnf <vars> <clauses>'", lineno, source)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("header counts must be integers", lineno, source) from None
            continue
        if parts[0] == "u":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError("expected 'u <universal count>'", lineno, source)
            universal = int(parts[1])
            continue
        if num_vars is None:
            raise ParseError("clause before the 'p cnf' header", lineno, source)
        for tok in parts:
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, source) from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(lit) > num_vars:
                raise ParseError(f"literal {lit} exceeds declared variable count {num_vars}", lineno, source)
            else:
                current.append(lit)
    if num_vars is None:
        raise ParseError("missing 'p cnf' header", None, source)
    if current:
        clauses.append(tuple(current))
    if num_clauses is not None and len(clauses) != num_clauses:
        raise ParseError(f"header declares {num_clauses} clauses, found {len(clauses)}", None, source)
    cnf = CnfFormula(num_vars, tuple(clauses))
    if universal is None:
        return cnf
    if universal > num_vars:
        raise ParseError("more universal variables than variables", None, source)
    try:
        return QbfFormula(universal, num_vars - universal, cnf)
    except ArgumentError as exc:
        raise ParseError(str(exc), None, source) from None


def format_dimacs(f: CnfFormula | QbfFormula) -> str:
    cnf = f.matrix if isinstance(f, QbfFormula) else f
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    if isinstance(f, QbfFormula):
        lines.append(f"u {f.universal}")
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"


def random_cnf(rng: random.Random, max_vars: int = 4, max_clauses: int = 4) -> CnfFormula:
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        size = rng.randint(1, n)
        chosen = rng.sample(range(1, n + 1), size)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in chosen))
    return CnfFormula(n, tuple(clauses))


def random_qbf(rng: random.Random, max_total: int = 5, max_clauses: int = 3) -> QbfFormula:
    total = rng.randint(1, max_total)
    n = rng.randint(0, total)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        clauses.append(tuple(rng.choice((1, -1)) * rng.randint(1, total) for _ in range(3)))
    return QbfFormula(n, total - n, CnfFormula(total, tuple(clauses)))


# --------------------------------------------------------------------------
# random contexts

SHAPES = ("single-key", "single-fd", "multi-fd", "denial-mixed", "fd-per-relation")


@dataclass(frozen=True)
class RandomProfile:
    facts: int = 8
    shape: str = "single-fd"
    density: float = 0.5
    values: int = 3

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ArgumentError(f"unknown shape {self.shape!r}; choose from {', '.join(SHAPES)}")
        if not 0 <= self.density <= 1:
            raise ArgumentError("density must lie in [0, 1]")
        if self.facts < 0:
            raise ArgumentError("fact count must be non-negative")


def _shape(shape: str):
    rat3 = [("A", "rat"), ("B", "rat"), ("C", "rat")]
    if shape == "single-key":
        return Schema({"R": rat3}), (FunctionalDependency("R", ("A",), ("A", "B", "C")),)
    if shape == "single-fd":
        return Schema({"R": rat3}), (FunctionalDependency("R", ("A",), ("B",)),)
    if shape == "fd-per-relation":
        return Schema({"R": rat3, "S": [("A", "rat"), ("B", "rat")]}), (
            FunctionalDependency("R", ("A",), ("B",)),
            FunctionalDependency("S", ("A",), ("A", "B")),
        )
    if shape == "multi-fd":
        return Schema({"R": rat3}), (
            FunctionalDependency("R", ("A",), ("B",)),
            FunctionalDependency("R", ("C",), ("A",)),
        )
    schema = Schema({"R": [("A", "rat"), ("B", "rat")], "S": [("A", "rat"), ("B", "rat")]})
    x, y, z, u, w = (Var(v) for v in "xyzuw")
    return schema, (
        FunctionalDependency("R", ("A",), ("B",)),
        # an R fact may not exceed an S fact sharing its key
        DenialConstraint((Atom("R", (x, y)), Atom("S", (x, z))), Cmp(">", y, z)),
        # three-way conflicts: two R facts with equal values and an S fact above both
        DenialConstraint(
            (Atom("R", (x, y)), Atom("R", (u, y)), Atom("S", (w, z))),
            conj(Cmp("!=", x, u), Cmp("=", w, y), Cmp("<", y, z)),
        ),
        # self-conflicting S facts
        DenialConstraint((Atom("S", (x, y)),), conj(Cmp("=", x, y), Cmp(">", x, 1))),
    )


def orient_randomly(rng: random.Random, pairs: list, density: float) -> set:
    """Orient a random subset of ``pairs``, flipping any orientation that would close a cycle."""
    succ: dict = {}

    def reaches(a, b):
        seen, stack = {a}, [a]
        while stack:
            u = stack.pop()
            if u == b:
                return True
            for v in succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    chosen = set()
    for a, b in pairs:
        if rng.random() >= density:
            continue
        w, l = (a, b) if rng.random() < 0.5 else (b, a)
        if reaches(l, w):
            w, l = l, w
        succ.setdefault(w, set()).add(l)
        chosen.add((w, l))
    return chosen


def random_ctx(seed: int, profile: RandomProfile | None = None, **overrides) -> Context:
    """A reproducible random prioritized context."""
    if profile is None:
        profile = RandomProfile(**overrides)
    elif overrides:
        raise ArgumentError("pass either a profile or keyword overrides, not both")
    rng = random.Random(seed)
    schema, constraints = _shape(profile.shape)
    rels = list(schema.relations.items())
    hi = profile.values
    capacity = sum((hi + 1) ** len(attrs) for _, attrs in rels)
    if profile.facts > capacity:
        raise ArgumentError("too many facts for the value range")
    facts: set = set()
    while len(facts) < profile.facts:
        name, attrs = rels[rng.randrange(len(rels))]
        facts.add(Fact(name, tuple(rng.randint(0, hi) for _ in attrs)))
    base = Context.build(facts, constraints, (), schema)
    pairs = orient_randomly(rng, base.hypergraph.neighbor_pairs(), profile.density)
    return base.with_priority(pairs)


def random_cnf_query(rng: random.Random, ctx: Context, max_clauses: int = 3, max_literals: int = 3,
                     absent: float = 0.2):
    """A ground quantifier-free CNF query over the facts of ``ctx``.

    Literals mostly mention facts of the instance; with probability
    ``absent`` a literal mentions a fresh fact of the same shape instead,
    and now and then a ground comparison appears.
    """
    facts = sorted(ctx.instance, key=fact_key)
    rels = sorted(ctx.schema.relations.items())
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        lits = []
        for _ in range(rng.randint(1, max_literals)):
            roll = rng.random()
            if roll < 0.05:
                lits.append(Cmp(rng.choice(("<", "=", ">=")), Fraction(rng.randint(0, 2)), Fraction(rng.randint(0, 2))))
                continue
            if roll < 0.05 + absent or not facts:
                name, attrs = rels[rng.randrange(len(rels))]
                f = Fact(name, tuple(rng.randint(0, 4) for _ in attrs))
            else:
                f = rng.choice(facts)
            atom = Atom(f.relation, f.values)
            lits.append(Not(atom) if rng.random() < 0.5 else atom)
        clauses.append(disj(*lits))
    return conj(*clauses)

"""Values, facts, schemas, denial constraints and closed first-order queries.

Everything here is immutable.  Rationals are :class:`fractions.Fraction`
(exact, arbitrary precision); uninterpreted constants are :class:`Const`.
The two domains never compare with each other: doing so raises
:class:`~prefcqa.errors.EvaluationError` instead of quietly answering false.
"""

from __future__ import annotations

import enum
import itertools
import operator
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

from .errors import ArgumentError, EvaluationError, SchemaError, UnsupportedShapeError


class Domain(enum.Enum):
    RATIONAL = "rat"
    CONSTANT = "const"

    @classmethod
    def parse(cls, text: str) -> "Domain":
        aliases = {"rat": cls.RATIONAL, "rational": cls.RATIONAL, "q": cls.RATIONAL,
                   "const": cls.CONSTANT, "constant": cls.CONSTANT, "d": cls.CONSTANT}
        try:
            return aliases[text.lower()]
        except KeyError:
            raise SchemaError(f"unknown domain tag {text!r} (use rat or const)") from None


@dataclass(frozen=True)
class Const:
    """An uninterpreted constant symbol."""

    name: str

    def __str__(self) -> str:
        return self.name


Value = Union[Fraction, Const]


def make_value(x) -> Value:
    """Coerce Python data to a domain value: ints become rationals, strings constants."""
    if isinstance(x, (Const, Fraction)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not database values")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Const(x)
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; pass a Fraction")
    raise TypeError(f"cannot use {x!r} as a database value")


def domain_of(v: Value) -> Domain:
    return Domain.RATIONAL if isinstance(v, Fraction) else Domain.CONSTANT


def value_key(v: Value):
    # rationals sort before constants
    if isinstance(v, Fraction):
        return (0, v)
    return (1, v.name)


ORDER_OPS = frozenset({"<", "<=", ">", ">="})
_OPS = {
    "=": operator.eq,
    "!=": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}
_OP_ALIASES = {"==": "=", "<>": "!=", "≠": "!=", "≤": "<=", "≥": ">="}


def compare(op: str, left: Value, right: Value) -> bool:
    """Apply a built-in comparison, rejecting cross-domain and ill-typed use."""
    lrat = isinstance(left, Fraction)
    if lrat != isinstance(right, Fraction):
        raise EvaluationError(f"cannot compare rational with constant: {left} {op} {right}")
    if op in ORDER_OPS and not lrat:
        raise EvaluationError(f"order comparison {op!r} applied to constants {left} and {right}")
    return _OPS[op](left, right)


@dataclass(frozen=True)
class Fact:
    """A ground relational atom ``relation(values...)``."""

    relation: str
    values: tuple

    def __post_init__(self):
        vals = tuple(make_value(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_hash", hash((self.relation, vals)))
        object.__setattr__(self, "key", (self.relation, tuple(value_key(v) for v in vals)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def arity(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        return f"{self.relation}({', '.join(str(v) for v in self.values)})"


def fact(relation: str, *values) -> Fact:
    return Fact(relation, values)


Instance = frozenset  # of Fact


def fact_key(f: Fact):
    return f.key


def sort_facts(facts: Iterable[Fact]) -> list[Fact]:
    """Facts in the global order: relation name, then values (rationals first)."""
    return sorted(facts, key=fact_key)


def instance_key(facts: Iterable[Fact]):
    return tuple(f.key for f in sort_facts(facts))


# --------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class Attribute:
    name: str
    domain: Domain = Domain.RATIONAL


class Schema:
    """Relation names mapped to ordered, typed attribute lists."""

    def __init__(self, relations: Mapping[str, Iterable]):
        rels: dict[str, tuple[Attribute, ...]] = {}
        for name, attrs in relations.items():
            norm = []
            for a in attrs:
                if isinstance(a, Attribute):
                    norm.append(a)
                else:
                    aname, dom = a
                    norm.append(Attribute(aname, dom if isinstance(dom, Domain) else Domain.parse(dom)))
            if not norm:
                raise SchemaError(f"relation {name} must have arity greater than 0")
            names = [a.name for a in norm]
            if len(set(names)) != len(names):
                raise SchemaError(f"relation {name} repeats an attribute name")
            rels[name] = tuple(norm)
        self._rels = rels

    @classmethod
    def infer(cls, facts: Iterable[Fact]) -> "Schema":
        """Derive a schema (attributes A1..An) from the value types of ``facts``."""
        seen: dict[str, list[set]] = {}
        for f in facts:
            cols = seen.setdefault(f.relation, [set() for _ in f.values])
            if len(cols) != f.arity:
                raise SchemaError(f"relation {f.relation} used with two arities")
            for col, v in zip(cols, f.values):
                col.add(domain_of(v))
        rels = {}
        for name, cols in seen.items():
            attrs = []
            for i, col in enumerate(cols, 1):
                if len(col) > 1:
                    raise SchemaError(f"{name}.A{i} mixes rationals and constants")
                attrs.append(Attribute(f"A{i}", col.pop() if col else Domain.RATIONAL))
            rels[name] = attrs
        return cls(rels)

    @property
    def relations(self) -> dict[str, tuple[Attribute, ...]]:
        return dict(self._rels)

    def __contains__(self, relation: str) -> bool:
        return relation in self._rels

    def __eq__(self, other) -> bool:
        return isinstance(other, Schema) and self._rels == other._rels

    def __repr__(self) -> str:
        return f"Schema({self._rels!r})"

    def attributes(self, relation: str) -> tuple[Attribute, ...]:
        try:
            return self._rels[relation]
        except KeyError:
            raise SchemaError(f"unknown relation {relation!r}") from None

    def arity(self, relation: str) -> int:
        return len(self.attributes(relation))

    def position(self, relation: str, attribute: str) -> int:
        for i, a in enumerate(self.attributes(relation)):
            if a.name == attribute:
                return i
        raise SchemaError(f"relation {relation} has no attribute {attribute!r}")

    def check_fact(self, f: Fact) -> None:
        attrs = self.attributes(f.relation)
        if len(attrs) != f.arity:
            raise SchemaError(f"{f} has arity {f.arity}, {f.relation} expects {len(attrs)}")
        for a, v in zip(attrs, f.values):
            if domain_of(v) is not a.domain:
                raise SchemaError(f"{f}: attribute {a.name} expects {a.domain.value}, got {v!r}")

    def check_instance(self, facts: Iterable[Fact]) -> None:
        for f in facts:
            self.check_fact(f)

    def _type_formula(self, formula, types: dict) -> None:
        """Unify variable domains across ``formula``; raise on any mismatch."""

        def assign(name, dom, what):
            prev = types.setdefault(name, dom)
            if prev is not dom:
                raise SchemaError(f"variable {name} used as both {prev.value} and {dom.value} ({what})")

        def term_dom(t):
            if isinstance(t, Var):
                return types.get(t.name)
            if isinstance(t, Shift):
                return Domain.RATIONAL
            return domain_of(t)

        pending = []

        def walk(f):
            if isinstance(f, Atom):
                attrs = self.attributes(f.relation)
                if len(attrs) != len(f.terms):
                    raise SchemaError(f"atom over {f.relation} has {len(f.terms)} terms, expected {len(attrs)}")
                for a, t in zip(attrs, f.terms):
                    if isinstance(t, Var):
                        assign(t.name, a.domain, f"argument {a.name} of {f.relation}")
                    elif domain_of(t) is not a.domain:
                        raise SchemaError(f"literal {t} does not fit {f.relation}.{a.name}")
            elif isinstance(f, Cmp):
                for t in (f.left, f.right):
                    if isinstance(t, Shift):
                        assign(t.var.name, Domain.RATIONAL, "arithmetic offset")
                    elif isinstance(t, Var) and f.op in ORDER_OPS:
                        assign(t.name, Domain.RATIONAL, f"order comparison {f.op}")
                    elif not isinstance(t, Var) and f.op in ORDER_OPS and domain_of(t) is not Domain.RATIONAL:
                        raise SchemaError(f"order comparison {f.op} on constant {t}")
                pending.append(f)
            elif isinstance(f, (And, Or)):
                for p in f.parts:
                    walk(p)
            elif isinstance(f, Not):
                walk(f.body)
            elif isinstance(f, (Exists, Forall)):
                walk(f.body)

        walk(formula)
        # equalities propagate types; iterate to a fixpoint
        changed = True
        while changed:
            changed = False
            for c in pending:
                ld, rd = term_dom(c.left), term_dom(c.right)
                if ld and rd and ld is not rd:
                    raise SchemaError(f"comparison {c.op} between {ld.value} and {rd.value} terms")
                for t, other in ((c.left, rd), (c.right, ld)):
                    if isinstance(t, Var) and other and t.name not in types:
                        types[t.name] = other
                        changed = True

    def check_constraint(self, dc: "DenialConstraint") -> None:
        self._type_formula(conj(*dc.atoms, dc.guard), {})

    def check_query(self, query) -> None:
        if free_vars(query):
            raise SchemaError(f"query has free variables: {sorted(free_vars(query))}")
        self._type_formula(query, {})


# --------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Shift:
    """A rational variable plus a fixed offset, e.g. ``i - 1``."""

    var: Var
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "offset", Fraction(self.offset))


def _coerce_term(t, allow_shift=True):
    if isinstance(t, Var):
        return t
    if isinstance(t, Shift):
        if not allow_shift:
            raise ArgumentError("arithmetic terms are only allowed inside comparisons")
        return t
    return make_value(t)


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(_coerce_term(t, allow_shift=False) for t in self.terms))


@dataclass(frozen=True)
class Cmp:
    op: str
    left: object
    right: object

    def __post_init__(self):
        op = _OP_ALIASES.get(self.op, self.op)
        if op not in _OPS:
            raise ArgumentError(f"unknown comparison operator {self.op!r}")
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "left", _coerce_term(self.left))
        object.__setattr__(self, "right", _coerce_term(self.right))


@dataclass(frozen=True)
class And:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Or:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))


@dataclass(frozen=True)
class Not:
    body: object


@dataclass(frozen=True)
class Exists:
    vars: tuple
    body: object

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))


@dataclass(frozen=True)
class Forall:
    vars: tuple
    body: object

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))


TRUE = And(())
FALSE = Or(())


def conj(*parts):
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts):
    flat = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def term_vars(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Shift):
        return {t.var.name}
    return set()


def free_vars(f) -> set[str]:
    if isinstance(f, Atom):
        return set().union(*(term_vars(t) for t in f.terms))
    if isinstance(f, Cmp):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, (And, Or)):
        return set().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f"not a formula: {f!r}")


def formula_values(f) -> set:
    """Literal values mentioned in a formula (offsets excluded)."""
    if isinstance(f, Atom):
        return {t for t in f.terms if not isinstance(t, (Var, Shift))}
    if isinstance(f, Cmp):
        return {t for t in (f.left, f.right) if not isinstance(t, (Var, Shift))}
    if isinstance(f, (And, Or)):
        return set().union(*(formula_values(p) for p in f.parts))
    if isinstance(f, Not):
        return formula_values(f.body)
    if isinstance(f, (Exists, Forall)):
        return formula_values(f.body)
    raise TypeError(f"not a formula: {f!r}")


def is_builtin(f) -> bool:
    """True for quantifier-free formulas built from comparisons only."""
    if isinstance(f, Cmp):
        return True
    if isinstance(f, (And, Or)):
        return all(is_builtin(p) for p in f.parts)
    if isinstance(f, Not):
        return is_builtin(f.body)
    return False


def is_quantifier_free(f) -> bool:
    if isinstance(f, (Atom, Cmp)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(p) for p in f.parts)
    if isinstance(f, Not):
        return is_quantifier_free(f.body)
    return False


def is_ground(f) -> bool:
    return is_quantifier_free(f) and not free_vars(f)


def is_atomic(f) -> bool:
    return isinstance(f, (Atom, Cmp))


def is_conjunctive(f) -> bool:
    while isinstance(f, Exists):
        f = f.body
    parts = f.parts if isinstance(f, And) else (f,)
    return all(isinstance(p, (Atom, Cmp)) for p in parts)


def _literal(f) -> bool:
    if isinstance(f, Not):
        f = f.body
    return isinstance(f, (Atom, Cmp))


def cnf_clauses(f) -> list[list]:
    """Split a quantifier-free CNF formula into clauses of literals.

    A literal is an atom, a comparison, or the negation of either.  ``TRUE``
    yields no clauses and ``FALSE`` one empty clause.  Anything that is not
    already in CNF raises :class:`UnsupportedShapeError`.
    """
    conjuncts = f.parts if isinstance(f, And) else (f,)
    clauses = []
    for c in conjuncts:
        lits = c.parts if isinstance(c, Or) else (c,)
        for lit in lits:
            if not _literal(lit):
                raise UnsupportedShapeError(f"query is not a quantifier-free CNF (offending part: {lit!r})")
        clauses.append(list(lits))
    return clauses


# --------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class DenialConstraint:
    """``forall x. not [R1(x1) and ... and Rn(xn) and guard]``."""

    atoms: tuple
    guard: object = TRUE

    def __post_init__(self):
        atoms = tuple(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        if not atoms:
            raise ArgumentError("a denial constraint needs at least one relational atom")
        if not all(isinstance(a, Atom) for a in atoms):
            raise ArgumentError("denial constraint atoms must be relational atoms")
        if not (is_builtin(self.guard) or self.guard in (TRUE, FALSE)):
            raise ArgumentError("the guard may only use built-in comparisons and connectives")
        missing = free_vars(self.guard) - self.variables
        if missing:
            raise ArgumentError(f"guard variables {sorted(missing)} do not occur in any atom")

    @property
    def variables(self) -> set[str]:
        return set().union(*(free_vars(a) for a in self.atoms))


@dataclass(frozen=True)
class FunctionalDependency:
    relation: str
    lhs: tuple
    rhs: tuple

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(self.lhs))
        object.__setattr__(self, "rhs", tuple(self.rhs))

    def is_key(self, schema: Schema) -> bool:
        names = {a.name for a in schema.attributes(self.relation)}
        return names <= set(self.rhs)

    def __str__(self) -> str:
        return f"{self.relation}: {','.join(self.lhs)} -> {','.join(self.rhs)}"


def desugar_fd(fd: FunctionalDependency, schema: Schema) -> DenialConstraint:
    """Express ``R: X -> Y`` as a two-atom denial constraint.

    Variables are named by attribute position: ``x<i>`` for X, ``y<i>_1`` /
    ``y<i>_2`` for Y outside X and ``z<i>_1`` / ``z<i>_2`` for the rest.
    """
    attrs = schema.attributes(fd.relation)
    names = [a.name for a in attrs]
    for a in (*fd.lhs, *fd.rhs):
        if a not in names:
            raise SchemaError(f"relation {fd.relation} has no attribute {a!r}")
    first, second, equal = [], [], []
    for i, name in enumerate(names, 1):
        if name in fd.lhs:
            v = Var(f"x{i}")
            first.append(v)
            second.append(v)
        elif name in fd.rhs:
            a, b = Var(f"y{i}_1"), Var(f"y{i}_2")
            first.append(a)
            second.append(b)
            equal.append(Cmp("=", a, b))
        else:
            first.append(Var(f"z{i}_1"))
            second.append(Var(f"z{i}_2"))
    return DenialConstraint(
        (Atom(fd.relation, tuple(first)), Atom(fd.relation, tuple(second))),
        Not(conj(*equal)),
    )


def to_denials(constraints: Iterable, schema: Schema) -> tuple[DenialConstraint, ...]:
    out = []
    for c in constraints:
        if isinstance(c, FunctionalDependency):
            out.append(desugar_fd(c, schema))
        elif isinstance(c, DenialConstraint):
            out.append(c)
        else:
            raise TypeError(f"not a constraint: {c!r}")
    return tuple(out)


# --------------------------------------------------------------------------
# evaluation


def term_value(t, env: Mapping[str, Value]) -> Value:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise EvaluationError(f"unbound variable {t.name}") from None
    if isinstance(t, Shift):
        v = term_value(t.var, env)
        if not isinstance(v, Fraction):
            raise EvaluationError(f"arithmetic on constant {v}")
        return v + t.offset
    return t


def eval_builtin(f, env: Mapping[str, Value]) -> bool:
    """Truth of a comparison-only formula under a variable assignment."""
    if isinstance(f, Cmp):
        return compare(f.op, term_value(f.left, env), term_value(f.right, env))
    if isinstance(f, And):
        return all(eval_builtin(p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_builtin(p, env) for p in f.parts)
    if isinstance(f, Not):
        return not eval_builtin(f.body, env)
    raise EvaluationError(f"not a built-in formula: {f!r}")


def active_domain(facts: Iterable[Fact], query=None) -> list[Value]:
    dom = {v for f in facts for v in f.values}
    if query is not None:
        dom |= formula_values(query)
    return sorted(dom, key=value_key)


def _infer_var_domains(query, schema: Schema | None) -> dict[str, Domain | None]:
    found: dict[str, set] = defaultdict(set)

    def walk(f):
        if isinstance(f, Atom):
            if schema is not None and f.relation in schema:
                attrs = schema.attributes(f.relation)
                for a, t in zip(attrs, f.terms):
                    if isinstance(t, Var):
                        found[t.name].add(a.domain)
        elif isinstance(f, Cmp):
            for t, other in ((f.left, f.right), (f.right, f.left)):
                if isinstance(t, Shift):
                    found[t.var.name].add(Domain.RATIONAL)
                elif isinstance(t, Var):
                    if f.op in ORDER_OPS:
                        found[t.name].add(Domain.RATIONAL)
                    elif not isinstance(other, (Var, Shift)):
                        found[t.name].add(domain_of(other))
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                walk(p)
        elif isinstance(f, Not):
            walk(f.body)
        elif isinstance(f, (Exists, Forall)):
            walk(f.body)

    walk(query)
    return {v: next(iter(d)) if len(d) == 1 else None for v, d in found.items()}


class _Evaluator:
    def __init__(self, facts, query, schema):
        self.tuples = {(f.relation, f.values) for f in facts}
        self.by_rel = defaultdict(list)
        for rel, vals in sorted(self.tuples, key=lambda t: (t[0], tuple(value_key(v) for v in t[1]))):
            self.by_rel[rel].append(vals)
        self.domain = active_domain(facts, query)
        self.var_domains = _infer_var_domains(query, schema)

    def value_range(self, name):
        dom = self.var_domains.get(name)
        if dom is None:
            return self.domain
        return [v for v in self.domain if domain_of(v) is dom]

    def holds(self, f, env) -> bool:
        if isinstance(f, Atom):
            return (f.relation, tuple(term_value(t, env) for t in f.terms)) in self.tuples
        if isinstance(f, Cmp):
            return compare(f.op, term_value(f.left, env), term_value(f.right, env))
        if isinstance(f, And):
            return all(self.holds(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(self.holds(p, env) for p in f.parts)
        if isinstance(f, Not):
            return not self.holds(f.body, env)
        if isinstance(f, Exists):
            return self.exists(f.vars, f.body, env)
        if isinstance(f, Forall):
            return not self.exists(f.vars, Not(f.body), env)
        raise TypeError(f"not a formula: {f!r}")

    def exists(self, names, body, env) -> bool:
        qvars = set(names)
        parts = body.parts if isinstance(body, And) else (body,)
        # positive atoms over quantified variables can only be satisfied by
        # instance facts, so they drive the search
        drivers = [p for p in parts if isinstance(p, Atom) and free_vars(p) & qvars]
        for binding in self._match(drivers, 0, {}, env, qvars):
            rest = [v for v in names if v not in binding]
            for combo in itertools.product(*(self.value_range(v) for v in rest)):
                inner = dict(env)
                inner.update(binding)
                inner.update(zip(rest, combo))
                if self.holds(body, inner):
                    return True
        return False

    def _match(self, atoms, i, binding, env, qvars) -> Iterator[dict]:
        if i == len(atoms):
            yield binding
            return
        atom = atoms[i]
        for vals in self.by_rel.get(atom.relation, ()):
            if len(vals) != len(atom.terms):
                continue
            local = dict(binding)
            ok = True
            for t, v in zip(atom.terms, vals):
                if isinstance(t, Var):
                    if t.name in qvars:
                        bound = local.get(t.name)
                        if bound is None:
                            local[t.name] = v
                        elif bound != v:
                            ok = False
                    elif env.get(t.name) != v:
                        ok = False
                elif t != v:
                    ok = False
                if not ok:
                    break
            if ok:
                yield from self._match(atoms, i + 1, local, env, qvars)


def eval_query(instance: Iterable[Fact], query, schema: Schema | None = None) -> bool:
    """Model-theoretic truth of a closed query; quantifiers range over the active domain."""
    open_vars = free_vars(query)
    if open_vars:
        raise EvaluationError(f"query has free variables: {sorted(open_vars)}")
    facts = list(instance)
    return _Evaluator(facts, query, schema).holds(query, {})

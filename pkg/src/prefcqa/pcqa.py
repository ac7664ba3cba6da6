"""Preferred consistent query answers.

:func:`pcqa_generic` evaluates a closed query in every preferred repair.
:func:`pcqa_single_fd` decides quantifier-free CNF queries without
enumerating repairs when each relation carries at most one functional
dependency: repairs then pick one (X,Y)-cluster out of every X-cluster, and
existence of a suitable preferred repair reduces to per-cluster tests.
"""

from __future__ import annotations

import enum
import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Iterable

from .context import Context
from .errors import UnsupportedShapeError
from .families import Family, preferred_repairs
from .model import (
    Atom,
    Cmp,
    Fact,
    FunctionalDependency,
    Not,
    Schema,
    cnf_clauses,
    eval_builtin,
    eval_query,
    free_vars,
)
from .priority import Priority, winnow
from .repairs import DEFAULT_CAP

CNF_SIZE_LIMIT = 4096


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class PcqaResult:
    verdict: Verdict
    true_witness: frozenset | None = None
    false_witness: frozenset | None = None
    method: str = "generic"


def pcqa_generic(ctx: Context, family: Family, q, cap: int = DEFAULT_CAP) -> PcqaResult:
    """Evaluate ``q`` in every preferred repair; keep one repair per outcome as witness."""
    if free_vars(q):
        raise UnsupportedShapeError(f"query has free variables {sorted(free_vars(q))}")
    yes = no = None
    for r in preferred_repairs(ctx, family, cap):
        if eval_query(r, q, ctx.schema):
            yes = yes or r
        else:
            no = no or r
        if yes is not None and no is not None:
            break
    if no is None:
        verdict = Verdict.TRUE
    elif yes is None:
        verdict = Verdict.FALSE
    else:
        verdict = Verdict.UNDETERMINED
    return PcqaResult(verdict, yes, no, "generic")


# --------------------------------------------------------------------------
# clusters


@dataclass(frozen=True)
class ClusterIndex:
    """X-clusters and (X,Y)-clusters of one relation under ``lhs -> rhs``."""

    relation: str
    x_of: dict
    xy_of: dict
    x_clusters: dict
    xy_clusters: dict

    def cluster(self, f: Fact) -> frozenset:
        return self.x_clusters[self.x_of[f]]

    def subcluster(self, f: Fact) -> frozenset:
        return self.xy_clusters[self.xy_of[f]]

    def conflicting(self, a: Fact, b: Fact) -> bool:
        return self.x_of[a] == self.x_of[b] and self.xy_of[a] != self.xy_of[b]


def build_cluster_index(instance: Iterable[Fact], fd: FunctionalDependency, schema: Schema) -> ClusterIndex:
    names = [a.name for a in schema.attributes(fd.relation)]
    xpos = [i for i, n in enumerate(names) if n in fd.lhs]
    ypos = [i for i, n in enumerate(names) if n in fd.rhs and n not in fd.lhs]
    x_of, xy_of = {}, {}
    xs: dict = {}
    xys: dict = {}
    for f in instance:
        if f.relation != fd.relation:
            continue
        xk = tuple(f.values[i] for i in xpos)
        xyk = (xk, tuple(f.values[i] for i in ypos))
        x_of[f] = xk
        xy_of[f] = xyk
        xs.setdefault(xk, set()).add(f)
        xys.setdefault(xyk, set()).add(f)
    return ClusterIndex(
        fd.relation,
        x_of,
        xy_of,
        {k: frozenset(v) for k, v in xs.items()},
        {k: frozenset(v) for k, v in xys.items()},
    )


class _Clusters:
    """Cluster lookup across relations; relations without a dependency give singletons."""

    def __init__(self, ctx: Context):
        self.by_rel: dict[str, ClusterIndex] = {}
        for c in ctx.constraints:
            if not isinstance(c, FunctionalDependency):
                raise UnsupportedShapeError("the tractable path accepts functional dependencies only")
            if c.relation in self.by_rel:
                raise UnsupportedShapeError(f"relation {c.relation} has more than one functional dependency")
            self.by_rel[c.relation] = build_cluster_index(ctx.instance, c, ctx.schema)

    def C(self, f: Fact) -> frozenset:
        idx = self.by_rel.get(f.relation)
        return idx.cluster(f) if idx else frozenset([f])

    def D(self, f: Fact) -> frozenset:
        idx = self.by_rel.get(f.relation)
        return idx.subcluster(f) if idx else frozenset([f])

    def conflicting(self, a: Fact, b: Fact) -> bool:
        if a.relation != b.relation:
            return False
        idx = self.by_rel.get(a.relation)
        return bool(idx) and idx.conflicting(a, b)

    def subclusters_of(self, f: Fact) -> list[frozenset]:
        idx = self.by_rel.get(f.relation)
        if not idx:
            return [frozenset([f])]
        xk = idx.x_of[f]
        return [d for k, d in idx.xy_clusters.items() if k[0] == xk]


def _pareto_ok(d: frozenset, c: frozenset, p: Priority) -> bool:
    """No fact outside ``d`` in its X-cluster beats every member of ``d``."""
    return all(not d <= p.beaten_by(y) for y in c - d)


def _global_ok(d: frozenset, subclusters: list, p: Priority) -> bool:
    """Every rival (X,Y)-cluster leaves some member of ``d`` unbeaten."""
    return all(any(not (p.dominators(x) & e) for x in d) for e in subclusters if e != d)


def _witness_exists(pos: list[Fact], neg: list[Fact], ctx: Context, cl: _Clusters,
                    family: Family, prio: Priority) -> bool:
    """Is there a preferred repair containing ``pos`` and avoiding ``neg``?"""
    inst = ctx.instance
    if any(f not in inst for f in pos):
        return False
    neg = [f for f in neg if f in inst]
    # (i) the required facts are jointly consistent
    for a, b in itertools.combinations(pos, 2):
        if cl.conflicting(a, b):
            return False
    # (ii) no required fact shares its (X,Y)-cluster with a forbidden one
    banned = set()
    for f in neg:
        banned |= cl.D(f)
    if any(f in banned for f in pos):
        return False
    if family is Family.PARETO:
        for f in pos:
            if not _pareto_ok(cl.D(f), cl.C(f), prio):
                return False
        for f in neg:
            c = cl.C(f)
            if not any(not (d & banned) and _pareto_ok(d, c, prio) for d in cl.subclusters_of(f)):
                return False
        return True
    if family is Family.GLOBAL:
        for f in pos:
            if not _global_ok(cl.D(f), cl.subclusters_of(f), prio):
                return False
        for f in neg:
            subs = cl.subclusters_of(f)
            if not any(not (d & banned) and _global_ok(d, subs, prio) for d in subs):
                return False
        return True
    # common optimal: the cluster must be enterable through an undominated fact
    for f in pos:
        if not cl.D(f) & winnow(prio, cl.C(f)):
            return False
    for f in neg:
        if not winnow(prio, cl.C(f)) - banned:
            return False
    return True


def _split_literals(clause: list, schema: Schema) -> tuple[list, list] | None:
    """Negate a clause into (facts required, facts forbidden); ``None`` if the clause is valid."""
    pos, neg = [], []
    for lit in clause:
        negated = isinstance(lit, Not)
        atom = lit.body if negated else lit
        if free_vars(atom):
            raise UnsupportedShapeError("the tractable path needs ground literals")
        if isinstance(atom, Cmp):
            if eval_builtin(atom, {}) != negated:
                return None  # literal always true: the clause cannot fail
            continue
        f = Fact(atom.relation, atom.terms)
        # a clause literal R(t) fails when R(t) is absent, and vice versa
        (pos if negated else neg).append(f)
    return pos, neg


def _true_answer(clauses: list, ctx: Context, cl: _Clusters, family: Family, prio: Priority) -> bool:
    for clause in clauses:
        split = _split_literals(clause, ctx.schema)
        if split is None:
            continue
        pos, neg = split
        if _witness_exists(pos, neg, ctx, cl, family, prio):
            return False
    return True


def _negate_literal(lit):
    return lit.body if isinstance(lit, Not) else Not(lit)


def negated_cnf(clauses: list, limit: int = CNF_SIZE_LIMIT) -> list | None:
    """CNF of the negation of a CNF, by distribution; ``None`` if it would exceed ``limit`` clauses."""
    size = math.prod(len(c) for c in clauses)
    if size > limit:
        return None
    return [[_negate_literal(l) for l in combo] for combo in itertools.product(*clauses)]


def pcqa_single_fd(ctx: Context, q, family: Family, cap: int = DEFAULT_CAP) -> PcqaResult:
    """Three-valued answer for a quantifier-free CNF query under one FD per relation."""
    cl = _Clusters(ctx)
    clauses = cnf_clauses(q)
    for clause in clauses:
        for lit in clause:
            atom = lit.body if isinstance(lit, Not) else lit
            if free_vars(atom):
                raise UnsupportedShapeError("the tractable path needs a ground query")
            if isinstance(atom, Atom):
                ctx.schema.check_query(atom)
    prio = ctx.priority if family is not Family.ALL else Priority(frozenset(), ctx.hypergraph)
    if _true_answer(clauses, ctx, cl, family, prio):
        return PcqaResult(Verdict.TRUE, method="single-fd")
    dual = negated_cnf(clauses)
    if dual is None:
        warnings.warn("negated query too large to convert to CNF; enumerating repairs instead", stacklevel=2)
        return pcqa_generic(ctx, family, q, cap)
    if _true_answer(dual, ctx, cl, family, prio):
        return PcqaResult(Verdict.FALSE, method="single-fd")
    return PcqaResult(Verdict.UNDETERMINED, method="single-fd")

"""Brute-force reference implementations used as ground truth in tests.

Nothing here reuses the conflict engine, the priority helpers or the
family checks: conflicts are found by trying every tuple of facts, repairs
by scanning the powerset, and each optimality notion by searching the
replacement sets of its definition directly.  Inputs are limited to
:data:`MAX_FACTS` facts.
"""

from __future__ import annotations

import itertools
import operator
from fractions import Fraction
from typing import Iterable

from .errors import ArgumentError
from .model import (
    And,
    Cmp,
    DenialConstraint,
    Fact,
    FunctionalDependency,
    Not,
    Or,
    Shift,
    Var,
)

MAX_FACTS = 12

_CMP = {"=": operator.eq, "!=": operator.ne, "<": operator.lt,
        "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def _value(t, env):
    if isinstance(t, Var):
        return env[t.name]
    if isinstance(t, Shift):
        return env[t.var.name] + t.offset
    return t


def _holds(phi, env) -> bool:
    if isinstance(phi, Cmp):
        a, b = _value(phi.left, env), _value(phi.right, env)
        if isinstance(a, Fraction) != isinstance(b, Fraction):
            raise TypeError(f"mixed comparison {a} {phi.op} {b}")
        return _CMP[phi.op](a, b)
    if isinstance(phi, And):
        return all(_holds(p, env) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_holds(p, env) for p in phi.parts)
    if isinstance(phi, Not):
        return not _holds(phi.body, env)
    raise TypeError(f"unexpected guard {phi!r}")


def _bind(atom, f: Fact, env: dict) -> bool:
    if atom.relation != f.relation or len(atom.terms) != len(f.values):
        return False
    for t, v in zip(atom.terms, f.values):
        if isinstance(t, Var):
            if t.name in env and env[t.name] != v:
                return False
            env[t.name] = v
        elif t != v:
            return False
    return True


class Oracle:
    """Definitional computations over one prioritized instance."""

    def __init__(self, ctx):
        facts = sorted(ctx.instance, key=repr)
        if len(facts) > MAX_FACTS:
            raise ArgumentError(f"oracles handle at most {MAX_FACTS} facts, got {len(facts)}")
        self.ctx = ctx
        self.facts = facts
        self.pos = {f: i for i, f in enumerate(facts)}
        self.n = len(facts)
        self.pairs = set(ctx.priority.pairs)
        self.conflicts = self._conflicts()
        self.repairs = self._repairs()

    # ---- conflicts -------------------------------------------------------

    def _conflicts(self) -> list[int]:
        found = set()
        for c in self.ctx.constraints:
            if isinstance(c, FunctionalDependency):
                names = [a.name for a in self.ctx.schema.attributes(c.relation)]
                xs = [i for i, a in enumerate(names) if a in c.lhs]
                ys = [i for i, a in enumerate(names) if a in c.rhs]
                for f, g in itertools.product(self.facts, repeat=2):
                    if f.relation == g.relation == c.relation \
                            and all(f.values[i] == g.values[i] for i in xs) \
                            and any(f.values[i] != g.values[i] for i in ys):
                        found.add((1 << self.pos[f]) | (1 << self.pos[g]))
            elif isinstance(c, DenialConstraint):
                for combo in itertools.product(self.facts, repeat=len(c.atoms)):
                    env: dict = {}
                    if all(_bind(a, f, env) for a, f in zip(c.atoms, combo)) and _holds(c.guard, env):
                        m = 0
                        for f in combo:
                            m |= 1 << self.pos[f]
                        found.add(m)
            else:
                raise TypeError(f"not a constraint: {c!r}")
        return sorted(found)

    def consistent(self, mask: int) -> bool:
        return not any(c & mask == c for c in self.conflicts)

    def _repairs(self) -> list[int]:
        full = (1 << self.n) - 1
        cons = [m for m in range(full + 1) if self.consistent(m)]
        cons_set = set(cons)
        return [m for m in cons
                if all((m | 1 << i) not in cons_set for i in range(self.n) if not m >> i & 1)]

    def to_set(self, mask: int) -> frozenset:
        return frozenset(f for i, f in enumerate(self.facts) if mask >> i & 1)

    def to_mask(self, facts: Iterable[Fact]) -> int:
        m = 0
        for f in facts:
            m |= 1 << self.pos[f]
        return m

    def neighbours(self) -> list[tuple[int, int]]:
        out = set()
        for c in self.conflicts:
            members = [i for i in range(self.n) if c >> i & 1]
            for a, b in itertools.combinations(members, 2):
                out.add((a, b))
        return sorted(out)

    # ---- optimality by definition ----------------------------------------

    def _prefers(self, pairs, y: int, x: int) -> bool:
        return (self.facts[y], self.facts[x]) in pairs

    def globally_optimal(self, r: int, pairs=None) -> bool:
        pairs = self.pairs if pairs is None else pairs
        inside = [i for i in range(self.n) if r >> i & 1]
        outside = [i for i in range(self.n) if not r >> i & 1]
        for k in range(1, len(outside) + 1):
            for ys in itertools.combinations(outside, k):
                for j in range(1, len(inside) + 1):
                    for xs in itertools.combinations(inside, j):
                        if not all(any(self._prefers(pairs, y, x) for y in ys) for x in xs):
                            continue
                        new = r
                        for x in xs:
                            new &= ~(1 << x)
                        for y in ys:
                            new |= 1 << y
                        if self.consistent(new):
                            return False
        return True

    def pareto_optimal(self, r: int, pairs=None) -> bool:
        pairs = self.pairs if pairs is None else pairs
        inside = [i for i in range(self.n) if r >> i & 1]
        outside = [i for i in range(self.n) if not r >> i & 1]
        for k in range(1, len(outside) + 1):
            for ys in itertools.combinations(outside, k):
                for j in range(1, len(inside) + 1):
                    for xs in itertools.combinations(inside, j):
                        if not all(self._prefers(pairs, y, x) for y in ys for x in xs):
                            continue
                        new = r
                        for x in xs:
                            new &= ~(1 << x)
                        for y in ys:
                            new |= 1 << y
                        if self.consistent(new):
                            return False
        return True

    def common_optimal(self, r: int) -> bool:
        """Some total acyclic extension of the priority makes ``r`` globally optimal."""
        pairs = set(self.pairs)
        succ = {i: set() for i in range(self.n)}
        for w, l in pairs:
            succ[self.pos[w]].add(self.pos[l])
        free = [(a, b) for a, b in self.neighbours()
                if (self.facts[a], self.facts[b]) not in pairs and (self.facts[b], self.facts[a]) not in pairs]

        def reach(src, dst):
            seen, stack = {src}, [src]
            while stack:
                u = stack.pop()
                if u == dst:
                    return True
                for v in succ[u]:
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            return False

        def search(k):
            # optimality only gets harder as pairs are added, so prune early
            if not self.globally_optimal(r, pairs):
                return False
            if k == len(free):
                return True
            a, b = free[k]
            options = [(a, b), (b, a)]
            if r >> b & 1 and not r >> a & 1:
                options.reverse()
            for w, l in options:
                if reach(l, w):
                    continue
                succ[w].add(l)
                pairs.add((self.facts[w], self.facts[l]))
                ok = search(k + 1)
                pairs.discard((self.facts[w], self.facts[l]))
                succ[w].discard(l)
                if ok:
                    return True
            return False

        return search(0)


def _sorted_sets(sets: Iterable[frozenset]) -> list[frozenset]:
    return sorted(sets, key=lambda s: sorted(map(repr, s)))


def oracle_conflicts(ctx) -> set[frozenset]:
    o = Oracle(ctx)
    return {o.to_set(c) for c in o.conflicts}


def oracle_repairs(ctx) -> list[frozenset]:
    o = Oracle(ctx)
    return _sorted_sets(o.to_set(m) for m in o.repairs)


def grep_oracle(ctx, pairs=None) -> list[frozenset]:
    """Repairs no replacement ``(X, Y)`` improves in the global sense."""
    o = Oracle(ctx)
    pairs = o.pairs if pairs is None else set(pairs)
    return _sorted_sets(o.to_set(m) for m in o.repairs if o.globally_optimal(m, pairs))


def prep_oracle(ctx) -> list[frozenset]:
    """Repairs no replacement ``(X, Y)`` improves in the Pareto sense."""
    o = Oracle(ctx)
    return _sorted_sets(o.to_set(m) for m in o.repairs if o.pareto_optimal(m))


def crep_oracle(ctx) -> list[frozenset]:
    """Repairs globally optimal under some total extension of the priority."""
    o = Oracle(ctx)
    return _sorted_sets(o.to_set(m) for m in o.repairs if o.common_optimal(m))


# --------------------------------------------------------------------------
# propositional ground truth


def brute_force_sat(num_vars: int, clauses: Iterable[Iterable[int]]) -> bool:
    clauses = [tuple(c) for c in clauses]
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def brute_force_qbf(universal: int, existential: int, clauses: Iterable[Iterable[int]]) -> bool:
    """Truth of ``forall x1..xn exists x(n+1)..x(n+m). clauses``."""
    clauses = [tuple(c) for c in clauses]
    for outer in itertools.product((False, True), repeat=universal):
        if not any(
            all(any((outer + inner)[abs(l) - 1] == (l > 0) for l in c) for c in clauses)
            for inner in itertools.product((False, True), repeat=existential)
        ):
            return False
    return True

"""Conflict detection and the conflict hypergraph.

A conflict is a set of facts that jointly instantiate the body of some
denial constraint under a substitution satisfying its guard.  The
substitution need not be injective, so a constraint with two atoms may
yield a one-fact conflict.  Facts are numbered in the global fact order
and sets of facts are handled internally as integer bitmasks.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator

from .errors import ArgumentError
from .model import (
    And,
    Atom,
    DenialConstraint,
    Fact,
    Schema,
    Var,
    eval_builtin,
    fact_key,
    free_vars,
    sort_facts,
    to_denials,
)


def _guard_conjuncts(guard) -> list:
    return list(guard.parts) if isinstance(guard, And) else [guard]


def _schedule(dc: DenialConstraint):
    """For each atom depth, the guard conjuncts that become fully bound there."""
    conjuncts = _guard_conjuncts(dc.guard)
    bound: set[str] = set()
    plan = []
    remaining = list(conjuncts)
    for atom in dc.atoms:
        bound |= free_vars(atom)
        ready = [c for c in remaining if free_vars(c) <= bound]
        remaining = [c for c in remaining if c not in ready]
        plan.append(ready)
    return plan


def _unify(atom: Atom, f: Fact, env: dict) -> dict | None:
    if len(atom.terms) != f.arity:
        return None
    local = env
    copied = False
    for t, v in zip(atom.terms, f.values):
        if isinstance(t, Var):
            bound = local.get(t.name)
            if bound is None:
                if not copied:
                    local = dict(local)
                    copied = True
                local[t.name] = v
            elif bound != v:
                return None
        elif t != v:
            return None
    return local if copied else dict(local)


def _matches(dc: DenialConstraint, by_rel: dict) -> Iterator[tuple]:
    plan = _schedule(dc)
    atoms = dc.atoms

    def go(depth, env, chosen):
        if depth == len(atoms):
            yield tuple(chosen)
            return
        for f in by_rel.get(atoms[depth].relation, ()):
            env2 = _unify(atoms[depth], f, env)
            if env2 is None:
                continue
            if all(eval_builtin(c, env2) for c in plan[depth]):
                chosen.append(f)
                yield from go(depth + 1, env2, chosen)
                chosen.pop()

    yield from go(0, {}, [])


def find_conflicts(instance: Iterable[Fact], constraints: Iterable, schema: Schema | None = None) -> set[frozenset]:
    """Every set of instance facts that violates one of ``constraints``.

    Functional dependencies are accepted when ``schema`` is given (or can be
    inferred from the instance) and are desugared first.
    """
    facts = sort_facts(set(instance))
    constraints = list(constraints)
    if any(not isinstance(c, DenialConstraint) for c in constraints):
        schema = schema or Schema.infer(facts)
        constraints = to_denials(constraints, schema)
    by_rel = defaultdict(list)
    for f in facts:
        by_rel[f.relation].append(f)
    found: set[frozenset] = set()
    for dc in constraints:
        for chosen in _matches(dc, by_rel):
            found.add(frozenset(chosen))
    return found


def _edge_key(edge: frozenset):
    return (len(edge), tuple(fact_key(f) for f in sort_facts(edge)))


class ConflictHypergraph:
    """Nodes are the instance facts, hyperedges its conflicts.

    Both are kept in a deterministic order; ``index`` maps each fact to its
    bit position.
    """

    def __init__(self, nodes: Iterable[Fact], edges: Iterable[frozenset]):
        self.nodes: tuple[Fact, ...] = tuple(sort_facts(set(nodes)))
        self.index: dict[Fact, int] = {f: i for i, f in enumerate(self.nodes)}
        uniq = {frozenset(e) for e in edges}
        for e in uniq:
            if not e or not e <= self.index.keys():
                raise ArgumentError("every hyperedge must be a nonempty set of nodes")
        self.edges: tuple[frozenset, ...] = tuple(sorted(uniq, key=_edge_key))
        self.edge_masks: tuple[int, ...] = tuple(self.mask(e) for e in self.edges)
        incident: list[list[int]] = [[] for _ in self.nodes]
        nbr = [0] * len(self.nodes)
        for m in self.edge_masks:
            for i in _bits(m):
                incident[i].append(m)
                nbr[i] |= m
        self.incident: tuple[tuple[int, ...], ...] = tuple(tuple(x) for x in incident)
        self.neighbor_masks: tuple[int, ...] = tuple(m & ~(1 << i) for i, m in enumerate(nbr))
        self.full_mask = (1 << len(self.nodes)) - 1

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"ConflictHypergraph({len(self.nodes)} facts, {len(self.edges)} conflicts)"

    @property
    def size(self) -> int:
        return len(self.nodes) + sum(len(e) for e in self.edges)

    def _idx(self, f: Fact) -> int:
        try:
            return self.index[f]
        except KeyError:
            raise ArgumentError(f"{f} is not a fact of this instance") from None

    def mask(self, facts: Iterable[Fact]) -> int:
        m = 0
        for f in facts:
            m |= 1 << self._idx(f)
        return m

    def facts_of(self, mask: int) -> frozenset:
        return frozenset(self.nodes[i] for i in _bits(mask))

    def neighbors(self, v: Fact) -> frozenset:
        return self.facts_of(self.neighbor_masks[self._idx(v)])

    def are_neighbors(self, a: Fact, b: Fact) -> bool:
        return bool(self.neighbor_masks[self._idx(a)] >> self._idx(b) & 1)

    def neighbor_pairs(self) -> list[tuple[Fact, Fact]]:
        """Unordered neighbouring pairs ``(a, b)`` with ``a`` first in fact order."""
        out = []
        for i, m in enumerate(self.neighbor_masks):
            for j in _bits(m >> (i + 1)):
                out.append((self.nodes[i], self.nodes[i + 1 + j]))
        return out

    def is_independent_mask(self, s: int) -> bool:
        return all(e & s != e for e in self.edge_masks)

    def is_independent(self, facts: Iterable[Fact]) -> bool:
        return self.is_independent_mask(self.mask(facts))

    def blocked_mask(self, i: int, s: int) -> bool:
        """Whether adding fact ``i`` to the set ``s`` would complete a conflict."""
        s |= 1 << i
        return any(e & s == e for e in self.incident[i])

    def blocked(self, f: Fact, facts: Iterable[Fact]) -> bool:
        return self.blocked_mask(self._idx(f), self.mask(facts))

    def conflicts_within(self, facts: Iterable[Fact]) -> list[frozenset]:
        s = self.mask(facts)
        return [e for e, m in zip(self.edges, self.edge_masks) if m & s == m]

    def is_maximal_independent_mask(self, s: int) -> bool:
        if not self.is_independent_mask(s):
            return False
        rest = self.full_mask & ~s
        return all(self.blocked_mask(i, s) for i in _bits(rest))


def _bits(m: int) -> Iterator[int]:
    while m:
        low = m & -m
        yield low.bit_length() - 1
        m ^= low


def build_hypergraph(instance: Iterable[Fact], constraints: Iterable, schema: Schema | None = None) -> ConflictHypergraph:
    facts = set(instance)
    return ConflictHypergraph(facts, find_conflicts(facts, constraints, schema))


def is_consistent(instance: Iterable[Fact], constraints: Iterable, schema: Schema | None = None) -> bool:
    return not find_conflicts(instance, constraints, schema)


def repair_defect(candidate: Iterable[Fact], hg: ConflictHypergraph) -> str | None:
    """Why ``candidate`` is not a repair of ``hg``'s instance, or ``None`` if it is."""
    cand = set(candidate)
    if not cand <= hg.index.keys():
        return "not a subset"
    s = hg.mask(cand)
    if not hg.is_independent_mask(s):
        return "inconsistent"
    if not hg.is_maximal_independent_mask(s):
        return "not maximal"
    return None


def is_repair(candidate: Iterable[Fact], instance: Iterable[Fact], constraints: Iterable,
              schema: Schema | None = None) -> bool:
    return repair_defect(candidate, build_hypergraph(instance, constraints, schema)) is None

"""A prioritized inconsistent database bundled with its conflict hypergraph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .conflicts import ConflictHypergraph, build_hypergraph
from .model import DenialConstraint, Fact, FunctionalDependency, Schema, to_denials
from .priority import Priority, validate_priority


@dataclass(frozen=True)
class Context:
    schema: Schema
    instance: frozenset
    constraints: tuple
    priority: Priority
    denials: tuple = field(compare=False, repr=False)
    hypergraph: ConflictHypergraph = field(compare=False, repr=False)

    @classmethod
    def build(
        cls,
        instance: Iterable[Fact],
        constraints: Iterable = (),
        priority: Iterable[tuple] | Priority = (),
        schema: Schema | None = None,
        mode: str = "strict",
    ) -> "Context":
        facts = frozenset(instance)
        schema = schema if schema is not None else Schema.infer(facts)
        schema.check_instance(facts)
        constraints = tuple(constraints)
        for c in constraints:
            if isinstance(c, DenialConstraint):
                schema.check_constraint(c)
        denials = to_denials(constraints, schema)
        hg = build_hypergraph(facts, denials)
        pairs = priority.pairs if isinstance(priority, Priority) else priority
        prio = validate_priority(pairs, hg, mode)
        return cls(schema, facts, constraints, prio, denials, hg)

    def with_priority(self, priority: Iterable[tuple] | Priority, mode: str = "strict") -> "Context":
        if isinstance(priority, Priority) and priority.host is self.hypergraph:
            prio = priority
        else:
            pairs = priority.pairs if isinstance(priority, Priority) else priority
            prio = validate_priority(pairs, self.hypergraph, mode)
        return Context(self.schema, self.instance, self.constraints, prio, self.denials, self.hypergraph)

    @property
    def functional_dependencies(self) -> tuple[FunctionalDependency, ...]:
        return tuple(c for c in self.constraints if isinstance(c, FunctionalDependency))

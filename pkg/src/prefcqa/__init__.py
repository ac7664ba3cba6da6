"""Preferred repairs and preferred consistent query answers for prioritized databases."""

from .conflicts import ConflictHypergraph, build_hypergraph, find_conflicts, is_consistent, is_repair
from .context import Context
from .errors import (
    ArgumentError,
    EnumerationLimitError,
    EvaluationError,
    ParseError,
    PrefCQAError,
    PriorityError,
    SchemaError,
    UnsupportedShapeError,
)
from .families import (
    Family,
    build_common_repair,
    build_global_repair,
    build_pareto_repair,
    build_repair,
    dominates_g,
    dominates_p,
    is_common_optimal,
    is_globally_optimal,
    is_pareto_optimal,
    preferred_repairs,
)
from .model import (
    And,
    Atom,
    Cmp,
    Const,
    DenialConstraint,
    Exists,
    Fact,
    Forall,
    FunctionalDependency,
    Not,
    Or,
    Schema,
    Shift,
    Var,
    eval_query,
    fact,
)
from .pcqa import PcqaResult, Verdict, pcqa_generic, pcqa_single_fd
from .priority import Priority, total_extensions, validate_priority, winnow
from .repairs import all_repairs, construct_repair

__all__ = [name for name in dir() if not name.startswith("_")]

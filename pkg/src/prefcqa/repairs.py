"""Greedy repair construction and exhaustive repair enumeration."""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .conflicts import ConflictHypergraph, _bits
from .errors import ArgumentError, EnumerationLimitError
from .model import Fact

DEFAULT_CAP = 100_000


def _as_hypergraph(source) -> ConflictHypergraph:
    return source if isinstance(source, ConflictHypergraph) else source.hypergraph


def _check_permutation(hg: ConflictHypergraph, choices: Sequence[Fact]) -> list[int]:
    idx = []
    for f in choices:
        if f not in hg.index:
            raise ArgumentError(f"choice {f} is not a fact of the instance")
        idx.append(hg.index[f])
    if len(set(idx)) != len(idx):
        raise ArgumentError("choice sequence repeats a fact")
    if len(idx) != len(hg.nodes):
        raise ArgumentError(f"choice sequence has {len(idx)} facts, the instance has {len(hg.nodes)}")
    return idx


def construct_repair(source, choices: Sequence[Fact]) -> frozenset:
    """Add facts in the order given, skipping any that would complete a conflict.

    ``source`` is a :class:`ConflictHypergraph` or a context carrying one;
    ``choices`` must list every fact exactly once.
    """
    hg = _as_hypergraph(source)
    s = 0
    for i in _check_permutation(hg, choices):
        if not hg.blocked_mask(i, s):
            s |= 1 << i
    return hg.facts_of(s)


def extend_to_repair(source, partial: Iterable[Fact], order: Sequence[Fact] | None = None) -> frozenset:
    """Grow a consistent set to a repair, trying facts in ``order`` (default: fact order)."""
    hg = _as_hypergraph(source)
    s = hg.mask(partial)
    if not hg.is_independent_mask(s):
        raise ArgumentError("cannot extend an inconsistent set to a repair")
    for f in order if order is not None else hg.nodes:
        i = hg.index[f]
        if not s >> i & 1 and not hg.blocked_mask(i, s):
            s |= 1 << i
    return hg.facts_of(s)


def enumerate_repair_masks(hg: ConflictHypergraph) -> Iterator[int]:
    """Maximal independent sets as bitmasks, by include/exclude backtracking.

    Excluding a fact is only explored while some incident conflict can still
    become complete, which is what maximality would eventually require.
    """
    n = len(hg.nodes)
    incident = hg.incident

    def can_still_block(i, chosen, decided):
        # some edge through i could end up inside chosen | {i}
        for e in incident[i]:
            other = e & ~(1 << i)
            if other & decided & ~chosen == 0:
                return True
        return False

    def go(i, chosen, decided):
        if i == n:
            if all(hg.blocked_mask(j, chosen) for j in _bits(hg.full_mask & ~chosen)):
                yield chosen
            return
        bit = 1 << i
        if not hg.blocked_mask(i, chosen):
            yield from go(i + 1, chosen | bit, decided | bit)
        if can_still_block(i, chosen, decided):
            yield from go(i + 1, chosen, decided | bit)

    yield from go(0, 0, 0)


def repair_order(source):
    """Sort key ordering fact sets by their members in the global fact order.

    Node positions follow that order already, so comparing index tuples is
    equivalent to comparing the facts and much cheaper.
    """
    index = _as_hypergraph(source).index
    return lambda facts: sorted(index[f] for f in facts)


def all_repairs(source, cap: int = DEFAULT_CAP) -> list[frozenset]:
    """Every repair, in a deterministic order; more than ``cap`` raises."""
    hg = _as_hypergraph(source)
    out = []
    for m in enumerate_repair_masks(hg):
        out.append(hg.facts_of(m))
        if len(out) > cap:
            raise EnumerationLimitError(cap)
    out.sort(key=repair_order(hg))
    return out

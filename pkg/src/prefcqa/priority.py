"""Priorities: acyclic preference relations between neighbouring facts."""

from __future__ import annotations

import graphlib
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .conflicts import ConflictHypergraph
from .errors import ArgumentError, PriorityError
from .model import Fact, fact_key


class PriorityWarning(UserWarning):
    """Emitted when lenient validation drops pairs of non-neighbouring facts."""


@dataclass(frozen=True)
class Priority:
    """A validated set of ``(winner, loser)`` pairs over a conflict hypergraph.

    Construct through :func:`validate_priority`; the constructor itself does
    not check acyclicity or neighbourhood.
    """

    pairs: frozenset
    host: ConflictHypergraph = field(compare=False, repr=False)
    dropped: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", frozenset(self.pairs))
        wins = defaultdict(set)
        losses = defaultdict(set)
        for w, l in self.pairs:
            wins[w].add(l)
            losses[l].add(w)
        object.__setattr__(self, "_wins", {k: frozenset(v) for k, v in wins.items()})
        object.__setattr__(self, "_losses", {k: frozenset(v) for k, v in losses.items()})

    def __len__(self) -> int:
        return len(self.pairs)

    def beats(self, winner: Fact, loser: Fact) -> bool:
        return (winner, loser) in self.pairs

    def beaten_by(self, f: Fact) -> frozenset:
        """Facts that ``f`` is preferred over."""
        return self._wins.get(f, frozenset())

    def dominators(self, f: Fact) -> frozenset:
        """Facts preferred over ``f``."""
        return self._losses.get(f, frozenset())

    def sorted_pairs(self) -> list[tuple[Fact, Fact]]:
        return sorted(self.pairs, key=lambda p: (fact_key(p[0]), fact_key(p[1])))


def _find_cycle(pairs: Iterable[tuple]) -> list | None:
    ts = graphlib.TopologicalSorter()
    for w, l in pairs:
        ts.add(l, w)
    try:
        ts.prepare()
    except graphlib.CycleError as exc:
        return list(exc.args[1])
    return None


def validate_priority(pairs: Iterable[tuple], hg: ConflictHypergraph, mode: str = "strict") -> Priority:
    """Check ``pairs`` against ``hg`` and return a :class:`Priority`.

    ``strict`` rejects pairs of facts that share no conflict; ``lenient``
    drops them with a :class:`PriorityWarning`.  Cycles are always rejected.
    """
    if mode not in ("strict", "lenient"):
        raise ArgumentError(f"unknown priority mode {mode!r}")
    kept, dropped = set(), []
    for w, l in pairs:
        for f in (w, l):
            if f not in hg.index:
                raise ArgumentError(f"priority mentions {f}, which is not in the instance")
        if w == l:
            raise PriorityError(f"{w} is preferred over itself", cycle=[w, w])
        if hg.are_neighbors(w, l):
            kept.add((w, l))
        elif mode == "strict":
            raise PriorityError(f"{w} and {l} do not share a conflict")
        else:
            dropped.append((w, l))
    cycle = _find_cycle(kept)
    if cycle is not None:
        raise PriorityError("priority is cyclic: " + " > ".join(str(f) for f in reversed(cycle)), cycle=cycle)
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} priority pair(s) between facts that share no conflict",
            PriorityWarning,
            stacklevel=2,
        )
    return Priority(frozenset(kept), hg, tuple(dropped))


def empty_priority(hg: ConflictHypergraph) -> Priority:
    return Priority(frozenset(), hg)


def is_total(p: Priority) -> bool:
    """Every two neighbouring facts are ordered one way or the other."""
    return all((a, b) in p.pairs or (b, a) in p.pairs for a, b in p.host.neighbor_pairs())


def extends(p1: Priority, p2: Priority) -> bool:
    """``p1`` contains every pair of ``p2``."""
    return p2.pairs <= p1.pairs


def winnow(p: Priority, s: Iterable[Fact]) -> frozenset:
    """Members of ``s`` not beaten by any other member of ``s``."""
    s = frozenset(s)
    return frozenset(f for f in s if not (p.dominators(f) & s))


def total_extensions(p: Priority) -> Iterator[Priority]:
    """Yield every total acyclic priority containing ``p``, each once.

    Unordered neighbouring pairs are oriented one at a time; an orientation
    ``a > b`` is tried only when ``b`` cannot already reach ``a``.
    """
    hg = p.host
    free = [(a, b) for a, b in hg.neighbor_pairs() if (a, b) not in p.pairs and (b, a) not in p.pairs]
    succ: dict[Fact, set] = defaultdict(set)
    for w, l in p.pairs:
        succ[w].add(l)

    def reaches(src, dst) -> bool:
        stack, seen = [src], {src}
        while stack:
            u = stack.pop()
            if u == dst:
                return True
            for v in succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return False

    chosen: list[tuple] = []

    def go(k):
        if k == len(free):
            yield Priority(p.pairs | frozenset(chosen), hg)
            return
        a, b = free[k]
        for w, l in ((a, b), (b, a)):
            if not reaches(l, w):
                succ[w].add(l)
                chosen.append((w, l))
                yield from go(k + 1)
                chosen.pop()
                succ[w].discard(l)

    yield from go(0)

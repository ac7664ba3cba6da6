"""Globally, Pareto and common optimal repairs.

Membership checks, dominance between repairs, and the constructive
algorithms for each family.  Every function takes a
:class:`~prefcqa.context.Context`, whose priority drives the preference.
"""

from __future__ import annotations

import enum
import itertools
import random
from typing import Iterable, Sequence

from .conflicts import _bits
from .context import Context
from .errors import ArgumentError
from .model import Fact
from .priority import Priority
from .repairs import DEFAULT_CAP, all_repairs, construct_repair, extend_to_repair, repair_order


class Family(enum.Enum):
    ALL = "all"
    GLOBAL = "global"
    PARETO = "pareto"
    COMMON = "common"

    @classmethod
    def parse(cls, text: str) -> "Family":
        aliases = {"all": cls.ALL, "a": cls.ALL, "rep": cls.ALL,
                   "g": cls.GLOBAL, "global": cls.GLOBAL,
                   "p": cls.PARETO, "pareto": cls.PARETO,
                   "c": cls.COMMON, "common": cls.COMMON}
        try:
            return aliases[text.lower()]
        except KeyError:
            raise ArgumentError(f"unknown family {text!r} (use all, g, p or c)") from None


def dominates_g(a: Iterable[Fact], b: Iterable[Fact], p: Priority) -> bool:
    """Every fact of ``b - a`` is beaten by some fact of ``a - b``."""
    a, b = frozenset(a), frozenset(b)
    if a == b:
        raise ArgumentError("dominance compares two different instances")
    gain = a - b
    return all(p.dominators(x) & gain for x in b - a)


def dominates_p(a: Iterable[Fact], b: Iterable[Fact], p: Priority) -> bool:
    """A single fact of ``a - b`` beats every fact of ``b - a``."""
    a, b = frozenset(a), frozenset(b)
    if a == b:
        raise ArgumentError("dominance compares two different instances")
    loss = b - a
    return any(loss <= p.beaten_by(y) for y in a - b)


def _repairs(ctx: Context, repairs, cap):
    return all_repairs(ctx, cap) if repairs is None else list(repairs)


def is_globally_optimal(r: Iterable[Fact], ctx: Context, repairs: Sequence | None = None,
                        cap: int = DEFAULT_CAP) -> bool:
    """No other repair dominates ``r`` in the global sense."""
    r = frozenset(r)
    return not any(o != r and dominates_g(o, r, ctx.priority) for o in _repairs(ctx, repairs, cap))


def pareto_attacker(r: Iterable[Fact], ctx: Context) -> Fact | None:
    """A fact outside ``r`` that beats a member of every conflict it would close, if any."""
    hg, p = ctx.hypergraph, ctx.priority
    r = frozenset(r)
    s = hg.mask(r)
    for y in hg.nodes:
        if y in r:
            continue
        beaten = hg.mask(p.beaten_by(y))
        if not beaten:
            continue
        i = hg.index[y]
        ok = True
        for e in hg.incident[i]:
            if e & ~(1 << i) & ~s == 0 and not e & beaten:
                ok = False
                break
        if ok:
            return y
    return None


def is_pareto_optimal(r: Iterable[Fact], ctx: Context) -> bool:
    return pareto_attacker(r, ctx) is None


def _restricted_run(r: frozenset, ctx: Context) -> bool:
    """Greedy simulation of the winnow-restricted construction aiming at ``r``.

    A fact may be taken when it is undominated among the remaining facts and
    taking it keeps the run on track: members of ``r`` must be addable and
    non-members must already be blocked.  Such moves stay available once
    enabled, so a greedy run gets stuck only if every run does.
    """
    hg, p = ctx.hypergraph, ctx.priority
    target = hg.mask(r)
    remaining = hg.full_mask
    built = 0
    dominated_by = [hg.mask(p.dominators(f)) for f in hg.nodes]
    progress = True
    while remaining and progress:
        progress = False
        for i in _bits(remaining):
            if dominated_by[i] & remaining:
                continue
            inside = target >> i & 1
            if inside and not hg.blocked_mask(i, built):
                built |= 1 << i
            elif inside or not hg.blocked_mask(i, built):
                continue
            remaining &= ~(1 << i)
            progress = True
    return remaining == 0 and built == target


def _exhaustive_run(r: frozenset, ctx: Context) -> bool:
    hg, p = ctx.hypergraph, ctx.priority
    target = hg.mask(r)
    dominated_by = [hg.mask(p.dominators(f)) for f in hg.nodes]
    failed: set[tuple[int, int]] = set()

    def go(remaining, built):
        if not remaining:
            return built == target
        if (remaining, built) in failed:
            return False
        for i in _bits(remaining):
            if dominated_by[i] & remaining:
                continue
            inside = target >> i & 1
            blocked = hg.blocked_mask(i, built)
            if inside and not blocked:
                if go(remaining & ~(1 << i), built | 1 << i):
                    return True
            elif not inside and blocked:
                if go(remaining & ~(1 << i), built):
                    return True
        failed.add((remaining, built))
        return False

    return go(hg.full_mask, 0)


def is_common_optimal(r: Iterable[Fact], ctx: Context, exhaustive: bool = False) -> bool:
    """Whether some winnow-restricted construction run produces exactly ``r``.

    ``exhaustive=True`` explores every run with backtracking instead of the
    default greedy run; both give the same answer.
    """
    r = frozenset(r)
    return _exhaustive_run(r, ctx) if exhaustive else _restricted_run(r, ctx)


def _seeded_order(ctx: Context, seed: int | None) -> list[Fact]:
    order = list(ctx.hypergraph.nodes)
    if seed is not None:
        random.Random(seed).shuffle(order)
    return order


def find_global_improvement(r: frozenset, ctx: Context, budget: int = 1 << 16):
    """Search replacement pairs ``(X, Y)`` by increasing ``|Y|``.

    Returns ``(X, Y)``, ``None`` when no improvement exists, or ``...`` when
    the budget ran out before the search space was exhausted.
    """
    hg, p = ctx.hypergraph, ctx.priority
    attackers = [y for y in hg.nodes if y not in r and p.beaten_by(y) & r]
    tried = 0
    for size in range(1, len(attackers) + 1):
        for ys in itertools.combinations(attackers, size):
            tried += 1
            if tried > budget:
                return ...
            xs = frozenset().union(*(p.beaten_by(y) & r for y in ys))
            if hg.is_independent((r - xs) | set(ys)):
                return xs, frozenset(ys)
    return None


def build_global_repair(ctx: Context, seed: int | None = None, budget: int = 1 << 16,
                        cap: int = DEFAULT_CAP) -> frozenset:
    """Start from some repair and keep swapping in preferred facts until none helps."""
    order = _seeded_order(ctx, seed)
    r = construct_repair(ctx, order)
    while True:
        step = find_global_improvement(r, ctx, budget)
        if step is None:
            return r
        if step is ...:
            better = [o for o in all_repairs(ctx, cap) if o != r and dominates_g(o, r, ctx.priority)]
            if not better:
                return r
            r = better[0]
            continue
        xs, ys = step
        r = extend_to_repair(ctx, (r - xs) | ys, order)


def build_common_repair(ctx: Context, choices: Sequence[Fact] | None = None,
                        seed: int | None = None) -> frozenset:
    """Repeatedly take an undominated remaining fact, keeping it if it fits.

    ``choices`` fixes a prefix of the choice sequence (each must be
    undominated when taken); later choices follow the global fact order, or
    a shuffled order when ``seed`` is given.
    """
    hg, p = ctx.hypergraph, ctx.priority
    dominated_by = [hg.mask(p.dominators(f)) for f in hg.nodes]
    remaining = hg.full_mask
    built = 0
    seen = set()
    for step, f in enumerate(choices or (), 1):
        if f not in hg.index:
            raise ArgumentError(f"choice {step} ({f}) is not a fact of the instance")
        i = hg.index[f]
        if f in seen:
            raise ArgumentError(f"choice {step} ({f}) was already taken")
        seen.add(f)
        if dominated_by[i] & remaining:
            raise ArgumentError(f"choice {step} ({f}) is dominated by a remaining fact")
        remaining &= ~(1 << i)
        if not hg.blocked_mask(i, built):
            built |= 1 << i
    order = [hg.index[f] for f in _seeded_order(ctx, seed)]
    while remaining:
        i = next(i for i in order if remaining >> i & 1 and not dominated_by[i] & remaining)
        remaining &= ~(1 << i)
        if not hg.blocked_mask(i, built):
            built |= 1 << i
    return hg.facts_of(built)


def build_pareto_repair(ctx: Context, seed: int | None = None) -> frozenset:
    """Take an arbitrary repair if it is Pareto optimal, else a common optimal one."""
    r = construct_repair(ctx, _seeded_order(ctx, seed))
    if is_pareto_optimal(r, ctx):
        return r
    return build_common_repair(ctx, seed=seed)


def build_repair(ctx: Context, family: Family, seed: int | None = None) -> frozenset:
    if family is Family.ALL:
        return construct_repair(ctx, _seeded_order(ctx, seed))
    if family is Family.GLOBAL:
        return build_global_repair(ctx, seed=seed)
    if family is Family.PARETO:
        return build_pareto_repair(ctx, seed=seed)
    return build_common_repair(ctx, seed=seed)


def preferred_repairs(ctx: Context, family: Family, cap: int = DEFAULT_CAP,
                      repairs: Sequence | None = None) -> list[frozenset]:
    """The repairs in ``family``, in deterministic order."""
    reps = _repairs(ctx, repairs, cap)
    if family is Family.ALL:
        out = list(reps)
    elif family is Family.PARETO:
        out = [r for r in reps if is_pareto_optimal(r, ctx)]
    elif family is Family.GLOBAL:
        candidates = [r for r in reps if is_pareto_optimal(r, ctx)]
        out = [r for r in candidates if is_globally_optimal(r, ctx, reps)]
    elif family is Family.COMMON:
        out = [r for r in reps if is_common_optimal(r, ctx)]
    else:
        raise ArgumentError(f"unknown family {family!r}")
    return sorted(out, key=repair_order(ctx))


def is_member(r: Iterable[Fact], ctx: Context, family: Family, cap: int = DEFAULT_CAP) -> bool:
    """Family membership for a set already known to be a repair."""
    if family is Family.ALL:
        return True
    if family is Family.PARETO:
        return is_pareto_optimal(r, ctx)
    if family is Family.GLOBAL:
        return is_pareto_optimal(r, ctx) and is_globally_optimal(r, ctx, cap=cap)
    return is_common_optimal(r, ctx)

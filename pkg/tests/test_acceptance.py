"""End-to-end acceptance checks.

Each test records one ``criterion N: PASS/FAIL`` line; the lines are
printed together at the end of the run by the hook in ``conftest.py``.
"""

import itertools
import random
import time

import pytest

from prefcqa.families import (
    Family,
    build_common_repair,
    build_global_repair,
    build_pareto_repair,
    dominates_g,
    preferred_repairs,
)
from prefcqa.generators import (
    SHAPES,
    CnfFormula,
    QbfFormula,
    counter_instance,
    qbf_reduction,
    random_cnf,
    random_cnf_query,
    random_ctx,
    random_qbf,
    sat_reduction,
)
from prefcqa.oracles import brute_force_qbf, brute_force_sat, crep_oracle, grep_oracle, oracle_repairs, prep_oracle
from prefcqa.pcqa import Verdict, pcqa_generic, pcqa_single_fd
from prefcqa.repairs import all_repairs

from conftest import ACCEPTANCE, EX1, EX2, FIG5, fixture_queries, load_fixture

CORPUS_SIZE = 500
DENSITIES = (0.2, 0.5, 0.8, 1.0)
PREFERRED = (Family.GLOBAL, Family.PARETO, Family.COMMON)


def report(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")


def as_set(repairs) -> set:
    return set(repairs)


def corpus_ctx(seed: int):
    return random_ctx(seed, facts=4 + seed % 9, shape=SHAPES[seed % len(SHAPES)],
                      density=DENSITIES[seed // len(SHAPES) % len(DENSITIES)])


@pytest.fixture(scope="module")
def corpus():
    out = []
    for seed in range(CORPUS_SIZE):
        ctx = corpus_ctx(seed)
        reps = all_repairs(ctx)
        fams = {f: as_set(preferred_repairs(ctx, f, repairs=reps)) for f in PREFERRED}
        fams[Family.ALL] = as_set(reps)
        out.append((seed, ctx, fams))
    return out


def linear_order(rng: random.Random, ctx) -> dict:
    """Rank of each fact in a random linear order compatible with the priority."""
    facts = sorted(ctx.instance, key=repr)
    rng.shuffle(facts)
    placed, rank = set(), {}
    while facts:
        f = next(f for f in facts if not (ctx.priority.dominators(f) - placed))
        facts.remove(f)
        placed.add(f)
        rank[f] = len(rank)
    return rank


def random_extension(rng: random.Random, ctx, total: bool):
    """A random acyclic priority containing the given one, optionally total."""
    rank = linear_order(rng, ctx)
    pairs = set(ctx.priority.pairs)
    for a, b in ctx.hypergraph.neighbor_pairs():
        if (a, b) in pairs or (b, a) in pairs:
            continue
        if total or rng.random() < 0.5:
            pairs.add((a, b) if rank[a] < rank[b] else (b, a))
    return ctx.with_priority(pairs)


def test_criterion_1_example2():
    t = time.perf_counter()
    ctx = load_fixture("example2")
    reps = all_repairs(ctx)
    got = {f: as_set(preferred_repairs(ctx, f)) for f in PREFERRED}
    elapsed = time.perf_counter() - t
    ok = (as_set(reps) == set(EX2.values()) and len(reps) == 4
          and got[Family.PARETO] == {EX2["I1'"], EX2["I2'"]}
          and got[Family.GLOBAL] == {EX2["I1'"]}
          and got[Family.COMMON] == {EX2["I1'"]}
          and elapsed < 1.0)
    report(1, ok, f"4 repairs, P={{I1',I2'}}, G=C={{I1'}}, {elapsed:.3f}s")
    assert ok


def test_criterion_2_example1():
    ctx = load_fixture("example1")
    reps = as_set(all_repairs(ctx))
    g = as_set(preferred_repairs(ctx, Family.GLOBAL))
    verdict = pcqa_generic(ctx, Family.GLOBAL, fixture_queries("example1")["q0"]).verdict
    ok = (reps == set(EX1.values()) and g == {EX1["I2'"], EX1["I3'"]}
          and g == as_set(grep_oracle(ctx)) and verdict is Verdict.FALSE)
    report(2, ok, f"3 repairs, G={{I2',I3'}}, Q0 answer {verdict.value}")
    assert ok


def test_criterion_3_fig5():
    ctx = load_fixture("fig5")
    reps = as_set(all_repairs(ctx))
    g = as_set(preferred_repairs(ctx, Family.GLOBAL))
    c = as_set(preferred_repairs(ctx, Family.COMMON))
    ok = reps == set(FIG5.values()) == g and c == {FIG5["I1'"], FIG5["I2'"]} and c < g
    report(3, ok, "3 repairs all globally optimal, C={I1',I2'}")
    assert ok


def test_criterion_4_oracle_equivalence(corpus):
    t = time.perf_counter()
    bad = []
    for seed, ctx, fams in corpus:
        oracle = {
            Family.ALL: as_set(oracle_repairs(ctx)),
            Family.GLOBAL: as_set(grep_oracle(ctx)),
            Family.PARETO: as_set(prep_oracle(ctx)),
            Family.COMMON: as_set(crep_oracle(ctx)),
        }
        bad += [(seed, f.value) for f in oracle if oracle[f] != fams[f]]
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 300
    report(4, ok, f"{len(corpus)} contexts, {len(bad)} disagreements, {elapsed:.1f}s")
    assert ok, bad[:10]


def test_criterion_5_framework_properties(corpus):
    rng = random.Random(2024)
    violations = []
    for seed, ctx, fams in corpus:
        if not all(fams[f] for f in PREFERRED):
            violations.append((seed, "P1"))
        if len(ctx.priority) == 0 and any(fams[f] != fams[Family.ALL] for f in PREFERRED):
            violations.append((seed, "P3"))
        plain = ctx.with_priority(())
        if any(as_set(preferred_repairs(plain, f)) != fams[Family.ALL] for f in PREFERRED):
            violations.append((seed, "P3"))
    # P2: 200 random extensions, alternating partial and total
    for k in range(200):
        seed, ctx, fams = corpus[(k * 37) % len(corpus)]
        ext = random_extension(rng, ctx, total=k % 2 == 1)
        for f in PREFERRED:
            if not as_set(preferred_repairs(ext, f)) <= fams[f]:
                violations.append((seed, "P2", f.value))
    # P4: a total extension of every corpus context
    for seed, ctx, _ in corpus:
        ext = random_extension(rng, ctx, total=True)
        got = [as_set(preferred_repairs(ext, f)) for f in PREFERRED]
        if len(got[0]) != 1 or any(g != got[0] for g in got):
            violations.append((seed, "P4"))
    ok = not violations
    report(5, ok, f"P1-P4 over {len(corpus)} contexts and 200 extensions, {len(violations)} violations")
    assert ok, violations[:10]


def test_criterion_6_hierarchy_and_collapse(corpus):
    violations, fd_splits = [], []
    for seed, ctx, fams in corpus:
        c, g, p = fams[Family.COMMON], fams[Family.GLOBAL], fams[Family.PARETO]
        if not c <= g <= p <= fams[Family.ALL]:
            violations.append((seed, "hierarchy"))
        shape = SHAPES[seed % len(SHAPES)]
        if shape == "single-key" and not c == g == p:
            violations.append((seed, "key collapse"))
        if shape in ("single-key", "single-fd") and g != c:
            fd_splits.append(seed)
    # every single-FD split must be real, not an artefact of the optimized checks
    confirmed = all(as_set(grep_oracle(corpus[s][1])) != as_set(crep_oracle(corpus[s][1])) for s in fd_splits)
    ok = not violations and not fd_splits
    report(6, ok, f"{len(corpus)} contexts: hierarchy and key collapse {len(violations)} violations; "
                  f"single-FD G=C fails on seeds {fd_splits}, oracle-confirmed={confirmed}")
    assert not violations, violations
    assert confirmed, fd_splits
    if fd_splits:
        pytest.xfail("G and C differ under a single FD; the claimed collapse does not hold "
                     f"(oracle-confirmed counterexamples: seeds {fd_splits})")


def test_criterion_7_counter_chain():
    problems = []
    for n in range(1, 7):
        case = counter_instance(n)
        chain = case.chain
        if len(chain) != 2 ** n + 2 ** (n - 1) - 1:
            problems.append((n, "length"))
        for k, (a, b) in enumerate(zip(chain, chain[1:])):
            if not dominates_g(a, b, case.ctx.priority):
                problems.append((n, "step", k))
        if n <= 4 and grep_oracle(case.ctx) != [chain[0]]:
            problems.append((n, "top"))
    ok = not problems and len(counter_instance(3).chain) == 11
    report(7, ok, f"n=1..6, chain length 11 at n=3, {len(problems)} problems")
    assert ok, problems


def test_criterion_8_single_fd_agreement():
    t = time.perf_counter()
    shapes = ("single-fd", "single-key", "fd-per-relation")
    bad = []
    for seed in range(300):
        ctx = random_ctx(seed, facts=2 + seed % 11, shape=shapes[seed % 3],
                         density=DENSITIES[seed // 3 % len(DENSITIES)])
        rng = random.Random(seed)
        for _ in range(3):
            q = random_cnf_query(rng, ctx)
            for f in PREFERRED:
                if pcqa_single_fd(ctx, q, f).verdict is not pcqa_generic(ctx, f, q).verdict:
                    bad.append((seed, f.value))
    elapsed = time.perf_counter() - t
    ok = not bad and elapsed < 120
    report(8, ok, f"300 contexts x 3 queries x 3 families, {len(bad)} disagreements, {elapsed:.1f}s")
    assert ok, bad[:10]


def small_cnfs(max_vars: int, max_clauses: int):
    """One CNF per class of formulas equal up to renaming variables."""
    seen = set()
    for n in range(1, max_vars + 1):
        universe = []
        for signs in itertools.product((0, 1, -1), repeat=n):
            clause = tuple((i + 1) * s for i, s in enumerate(signs) if s)
            if clause:
                universe.append(clause)
        for k in range(1, max_clauses + 1):
            for clauses in itertools.combinations(universe, k):
                canon = min(
                    tuple(sorted(tuple(sorted((perm[abs(l) - 1] + 1) * (1 if l > 0 else -1) for l in c))
                                 for c in clauses))
                    for perm in itertools.permutations(range(n))
                )
                if (n, canon) not in seen:
                    seen.add((n, canon))
                    yield CnfFormula(n, clauses)


def small_qbfs(max_total: int, max_clauses: int):
    for total in range(1, max_total + 1):
        lits = [s * v for v in range(1, total + 1) for s in (1, -1)]
        clauses = list(itertools.combinations_with_replacement(lits, 3))
        for k in range(1, max_clauses + 1):
            for matrix in itertools.combinations(clauses, k):
                for n in range(total + 1):
                    yield QbfFormula(n, total - n, CnfFormula(total, matrix))


def test_criterion_9_reductions():
    bad, sat_count, qbf_count = [], 0, 0
    rng = random.Random(9)
    sample = [random_cnf(rng, 4, 4) for _ in range(400)]
    for f in itertools.chain(small_cnfs(3, 3), sample):
        case = sat_reduction(f)
        unsat = not brute_force_sat(f.num_vars, f.clauses)
        for fam in PREFERRED:
            if (pcqa_generic(case.ctx, fam, case.query).verdict is Verdict.TRUE) != unsat:
                bad.append(("sat", f, fam.value))
        sat_count += 1
    qsample = [random_qbf(rng, 5, 3) for _ in range(400)]
    for f in itertools.chain(small_qbfs(2, 2), qsample):
        case = qbf_reduction(f)
        valid = brute_force_qbf(f.universal, f.existential, f.matrix.clauses)
        if (pcqa_generic(case.ctx, Family.GLOBAL, case.query).verdict is Verdict.TRUE) != valid:
            bad.append(("qbf", f))
        qbf_count += 1
    ok = not bad
    report(9, ok, f"{sat_count} CNFs x 3 families, {qbf_count} QBFs, {len(bad)} disagreements")
    assert ok, bad[:10]


def common_choice_image(ctx) -> dict:
    """Every repair reachable by some valid choice sequence, with one such sequence."""
    hg, p = ctx.hypergraph, ctx.priority
    dominated_by = [hg.mask(p.dominators(f)) for f in hg.nodes]
    image, seen = {}, set()
    stack = [(hg.full_mask, 0, ())]
    while stack:
        remaining, built, path = stack.pop()
        if (remaining, built) in seen:
            continue
        seen.add((remaining, built))
        if not remaining:
            image.setdefault(hg.facts_of(built), path)
            continue
        for i in range(len(hg.nodes)):
            if remaining >> i & 1 and not dominated_by[i] & remaining:
                nb = built if hg.blocked_mask(i, built) else built | 1 << i
                stack.append((remaining & ~(1 << i), nb, path + (hg.nodes[i],)))
    return image


def test_criterion_10_algorithms(corpus):
    problems = []
    small = [(seed, ctx) for seed, ctx, _ in corpus if len(ctx.instance) <= 8]
    for seed, ctx in small:
        image = common_choice_image(ctx)
        if set(image) != as_set(crep_oracle(ctx)):
            problems.append((seed, "common image"))
        for r, path in image.items():
            if build_common_repair(ctx, list(path)) != r:
                problems.append((seed, "replay"))
        g, p = as_set(grep_oracle(ctx)), as_set(prep_oracle(ctx))
        for s in range(4):
            if build_global_repair(ctx, seed=s) not in g:
                problems.append((seed, "global", s))
            if build_pareto_repair(ctx, seed=s) not in p:
                problems.append((seed, "pareto", s))
    ok = not problems
    report(10, ok, f"{len(small)} contexts of at most 8 facts, {len(problems)} problems")
    assert ok, problems[:10]

import pytest
from hypothesis import given, settings, strategies as st

from prefcqa.context import Context
from prefcqa.errors import ArgumentError, EnumerationLimitError
from prefcqa.generators import SHAPES, random_ctx
from prefcqa.model import FunctionalDependency, fact
from prefcqa.oracles import oracle_repairs
from prefcqa.repairs import all_repairs, construct_repair, extend_to_repair

from conftest import BOB70, E80, KEN60, MARY50, EX1, EX2


def test_example2_has_four_repairs(ex2):
    assert set(all_repairs(ex2)) == set(EX2.values())


def test_example1_has_three_repairs(ex1):
    assert set(all_repairs(ex1)) == set(EX1.values())


def test_construction_follows_the_choice_order(ex2, ex1):
    order = [BOB70, MARY50, KEN60] + [f for f in ex2.hypergraph.nodes if f not in {BOB70, MARY50, KEN60}]
    assert construct_repair(ex2, order) == EX2["I1'"]
    order = [E80] + [f for f in ex1.hypergraph.nodes if f != E80]
    assert construct_repair(ex1, order) == EX1["I1'"]


def test_construction_needs_a_permutation(ex2):
    nodes = list(ex2.hypergraph.nodes)
    with pytest.raises(ArgumentError):
        construct_repair(ex2, nodes[:-1])
    with pytest.raises(ArgumentError):
        construct_repair(ex2, nodes + nodes[:1])
    with pytest.raises(ArgumentError):
        construct_repair(ex2, nodes[:-1] + [fact("Mgr", "Zoe", 1, "IT")])


def test_extend(ex2):
    assert extend_to_repair(ex2, {BOB70, MARY50}) == EX2["I1'"]
    with pytest.raises(ArgumentError):
        extend_to_repair(ex2, set(ex2.instance))


def test_cap_raises_instead_of_truncating():
    facts = [fact("R", k, v) for k in range(4) for v in range(2)]
    ctx = Context.build(facts, [FunctionalDependency("R", ("A1",), ("A2",))])
    assert len(all_repairs(ctx)) == 16
    with pytest.raises(EnumerationLimitError):
        all_repairs(ctx, cap=15)


def test_consistent_instance_is_its_own_repair():
    facts = {fact("R", 1, 1), fact("R", 2, 2)}
    ctx = Context.build(facts, [FunctionalDependency("R", ("A1",), ("A2",))])
    assert all_repairs(ctx) == [frozenset(facts)]


def test_empty_instance():
    ctx = Context.build([], [])
    assert all_repairs(ctx) == [frozenset()]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(SHAPES), st.integers(1, 10))
def test_enumeration_matches_powerset_scan(seed, shape, n):
    ctx = random_ctx(seed, facts=n, shape=shape)
    assert sorted(all_repairs(ctx), key=sorted_key) == sorted(oracle_repairs(ctx), key=sorted_key)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.randoms(use_true_random=False))
def test_every_construction_is_a_repair(seed, rnd):
    ctx = random_ctx(seed, facts=9, shape="denial-mixed")
    order = list(ctx.hypergraph.nodes)
    rnd.shuffle(order)
    assert construct_repair(ctx, order) in all_repairs(ctx)


def sorted_key(r):
    return sorted(map(repr, r))

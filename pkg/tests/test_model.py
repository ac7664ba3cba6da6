import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from prefcqa.errors import ArgumentError, EvaluationError, SchemaError, UnsupportedShapeError
from prefcqa.model import (
    FALSE,
    TRUE,
    And,
    Atom,
    Cmp,
    Const,
    DenialConstraint,
    Domain,
    Exists,
    Fact,
    Forall,
    FunctionalDependency,
    Not,
    Or,
    Schema,
    Shift,
    Var,
    cnf_clauses,
    compare,
    conj,
    desugar_fd,
    eval_query,
    fact,
    free_vars,
    is_atomic,
    is_conjunctive,
    is_ground,
    is_quantifier_free,
    make_value,
    sort_facts,
)

from conftest import E40, E50, E80, MARY

EMP_SCHEMA = Schema({
    "Emp": [("Name", "const"), ("Salary", "rat"), ("Dept", "const")],
    "Mgr": [("Name", "const"), ("Salary", "rat"), ("Dept", "const")],
})
I0 = frozenset({E40, E50, E80, MARY})
x, y, z = Var("x"), Var("y"), Var("z")
Q0 = Exists(("x", "y"), And((Atom("Emp", ("John", x, y)), Cmp(">", x, 60000))))


class TestValues:
    def test_ints_become_exact_rationals(self):
        assert make_value(3) == Fraction(3)
        assert isinstance(make_value(3), Fraction)

    def test_strings_become_constants(self):
        assert make_value("IT") == Const("IT")

    @pytest.mark.parametrize("bad", [1.5, True, None, [1]])
    def test_rejects_other_python_values(self, bad):
        with pytest.raises(TypeError):
            make_value(bad)

    def test_rational_order(self):
        assert compare("<", Fraction(1, 3), Fraction(1, 2))
        assert compare(">=", Fraction(2, 4), Fraction(1, 2))
        assert compare("!=", Fraction(1), Fraction(2))

    def test_constants_support_equality_only(self):
        assert compare("=", Const("a"), Const("a"))
        assert compare("!=", Const("a"), Const("b"))
        with pytest.raises(EvaluationError):
            compare("<", Const("a"), Const("b"))

    def test_cross_domain_comparison_is_an_error(self):
        with pytest.raises(EvaluationError):
            compare("=", Const("1"), Fraction(1))

    @given(st.fractions(), st.fractions())
    def test_comparisons_agree_with_fraction_order(self, a, b):
        assert compare("<", a, b) == (a < b)
        assert compare("<=", a, b) == (a <= b)
        assert compare("=", a, b) == (a == b)
        assert compare(">", a, b) != compare("<=", a, b)


class TestFactsAndSchema:
    def test_fact_equality_is_structural(self):
        assert fact("R", 1, "a") == Fact("R", (Fraction(1), Const("a")))
        assert len({fact("R", 1), fact("R", 1)}) == 1

    def test_global_order_puts_rationals_first(self):
        facts = [fact("R", "b"), fact("R", 2), fact("Q", 9), fact("R", 1)]
        assert sort_facts(facts) == [fact("Q", 9), fact("R", 1), fact("R", 2), fact("R", "b")]

    def test_schema_checks_arity_and_domains(self):
        EMP_SCHEMA.check_fact(E40)
        with pytest.raises(SchemaError):
            EMP_SCHEMA.check_fact(fact("Emp", "John", 1))
        with pytest.raises(SchemaError):
            EMP_SCHEMA.check_fact(fact("Emp", "John", "high", "IT"))
        with pytest.raises(SchemaError):
            EMP_SCHEMA.check_fact(fact("Dept", "IT"))

    def test_schema_rejects_empty_and_duplicate_attributes(self):
        with pytest.raises(SchemaError):
            Schema({"R": []})
        with pytest.raises(SchemaError):
            Schema({"R": [("A", "rat"), ("A", "rat")]})

    def test_infer_names_positions(self):
        s = Schema.infer([fact("R", 1, "a")])
        assert [(a.name, a.domain) for a in s.attributes("R")] == [("A1", Domain.RATIONAL), ("A2", Domain.CONSTANT)]

    def test_infer_rejects_mixed_columns(self):
        with pytest.raises(SchemaError):
            Schema.infer([fact("R", 1), fact("R", "a")])

    def test_position_lookup(self):
        assert EMP_SCHEMA.position("Emp", "Dept") == 2
        with pytest.raises(SchemaError):
            EMP_SCHEMA.position("Emp", "Age")


class TestFormulas:
    def test_atoms_reject_arithmetic_terms(self):
        with pytest.raises(ArgumentError):
            Atom("R", (Shift(x, 1),))

    def test_comparison_aliases_normalise(self):
        assert Cmp("<>", x, y).op == "!="
        assert Cmp("==", x, y).op == "="
        with pytest.raises(ArgumentError):
            Cmp("~", x, y)

    def test_free_variables(self):
        assert free_vars(Q0) == set()
        assert free_vars(Exists(("x",), Atom("R", (x, y)))) == {"y"}
        assert free_vars(Cmp("=", Shift(z, 1), 3)) == {"z"}

    def test_shape_predicates(self):
        ground = And((Atom("R", (1,)), Not(Atom("R", (2,)))))
        assert is_ground(ground) and is_quantifier_free(ground)
        assert not is_quantifier_free(Q0)
        assert is_atomic(Atom("R", (1,))) and not is_atomic(ground)
        assert is_conjunctive(Q0)
        assert not is_conjunctive(Exists(("x",), Or((Atom("R", (x,)), Atom("S", (x,))))))

    def test_conj_flattens(self):
        a, b, c = (Atom("R", (i,)) for i in range(3))
        assert conj(a, conj(b, c)) == And((a, b, c))
        assert conj(a) == a

    def test_cnf_clauses(self):
        a, b, c = (Atom("R", (i,)) for i in range(3))
        assert cnf_clauses(And((Or((a, Not(b))), c))) == [[a, Not(b)], [c]]
        assert cnf_clauses(TRUE) == []
        assert cnf_clauses(FALSE) == [[]]
        with pytest.raises(UnsupportedShapeError):
            cnf_clauses(Or((And((a, b)), c)))
        with pytest.raises(UnsupportedShapeError):
            cnf_clauses(Exists(("x",), Atom("R", (x,))))


class TestConstraints:
    def test_denial_needs_an_atom(self):
        with pytest.raises(ArgumentError):
            DenialConstraint(())

    def test_guard_must_be_builtin_and_bound(self):
        with pytest.raises(ArgumentError):
            DenialConstraint((Atom("R", (x,)),), Atom("S", (x,)))
        with pytest.raises(ArgumentError):
            DenialConstraint((Atom("R", (x,)),), Cmp("<", x, y))

    def test_key_dependency_desugars_to_two_atom_denial(self):
        fd = FunctionalDependency("Emp", ("Name",), ("Name", "Salary", "Dept"))
        dc = desugar_fd(fd, EMP_SCHEMA)
        y1, y2, z1, z2 = Var("y2_1"), Var("y2_2"), Var("y3_1"), Var("y3_2")
        assert dc.atoms == (Atom("Emp", (Var("x1"), y1, z1)), Atom("Emp", (Var("x1"), y2, z2)))
        assert dc.guard == Not(And((Cmp("=", y1, y2), Cmp("=", z1, z2))))
        assert fd.is_key(EMP_SCHEMA)

    def test_attributes_outside_the_dependency_stay_free(self):
        s = Schema({"R": [("A", "rat"), ("B", "rat"), ("C", "rat")]})
        dc = desugar_fd(FunctionalDependency("R", ("A",), ("B",)), s)
        assert dc.atoms[0].terms[2] == Var("z3_1")
        assert dc.guard == Not(Cmp("=", Var("y2_1"), Var("y2_2")))
        assert not FunctionalDependency("R", ("A",), ("B",)).is_key(s)

    def test_unknown_attribute(self):
        with pytest.raises(SchemaError):
            desugar_fd(FunctionalDependency("Emp", ("Age",), ("Name",)), EMP_SCHEMA)


class TestEvaluation:
    def test_q0_holds_in_the_inconsistent_instance(self):
        assert eval_query(I0, Q0, EMP_SCHEMA)

    def test_q0_per_repair(self):
        assert eval_query({E80}, Q0, EMP_SCHEMA)
        assert not eval_query({E50, MARY}, Q0, EMP_SCHEMA)
        assert not eval_query({E40, MARY}, Q0, EMP_SCHEMA)

    def test_universal_quantifier(self):
        everyone_in_it = Forall(("x", "y", "z"), Or((Not(Atom("Emp", (x, y, z))), Cmp("=", z, "IT"))))
        assert eval_query(I0, everyone_in_it, EMP_SCHEMA)
        assert not eval_query(I0 | {fact("Emp", "Ann", 1, "PR")}, everyone_in_it, EMP_SCHEMA)

    def test_negated_existential(self):
        nobody_poor = Not(Exists(("x", "y", "z"), And((Atom("Emp", (x, y, z)), Cmp("<", y, 45000)))))
        assert not eval_query(I0, nobody_poor, EMP_SCHEMA)
        assert eval_query({E50, E80}, nobody_poor, EMP_SCHEMA)

    def test_shifted_terms(self):
        q = Exists(("x", "y"), And((Atom("R", (x,)), Atom("R", (y,)), Cmp("=", y, Shift(x, 1)))))
        assert eval_query({fact("R", 3), fact("R", 4)}, q)
        assert not eval_query({fact("R", 3), fact("R", 5)}, q)

    def test_ground_queries(self):
        assert eval_query(I0, Atom("Emp", ("John", 40000, "IT")))
        assert eval_query(I0, Not(Atom("Emp", ("John", 1, "IT"))))
        assert eval_query(I0, TRUE) and not eval_query(I0, FALSE)

    def test_free_variables_are_rejected(self):
        with pytest.raises(EvaluationError):
            eval_query(I0, Atom("Emp", (x, y, z)))

    def test_check_query_catches_type_errors(self):
        EMP_SCHEMA.check_query(Q0)
        with pytest.raises(SchemaError):
            EMP_SCHEMA.check_query(Exists(("x",), And((Atom("Emp", (x, 1, "IT")), Cmp(">", x, 3)))))

    @given(st.sets(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=8),
           st.sampled_from(["<", "<=", "=", "!=", ">", ">="]),
           st.integers(-1, 4))
    def test_matches_naive_active_domain_evaluation(self, rows, op, k):
        facts = {fact("R", a, b) for a, b in rows}
        q = Exists(("x", "y"), And((Atom("R", (x, y)), Cmp(op, x, Shift(y, k)))))
        dom = sorted({v for f in facts for v in f.values})
        naive = any(
            (a, b) in {f.values for f in facts} and compare(op, a, b + k)
            for a, b in itertools.product(dom, repeat=2)
        )
        assert eval_query(facts, q) == naive
        universal = Forall(("x", "y"), Or((Not(Atom("R", (x, y))), Cmp(op, x, Shift(y, k)))))
        naive_all = all(compare(op, f.values[0], f.values[1] + k) for f in facts)
        assert eval_query(facts, universal) == naive_all

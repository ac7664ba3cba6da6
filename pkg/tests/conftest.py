from pathlib import Path

import pytest

from prefcqa.context import Context
from prefcqa.formats import parse_constraints, parse_instance, parse_priority, parse_queries
from prefcqa.model import fact

DATA = Path(__file__).parent / "data"


def load_fixture(name: str, with_priority: bool = True) -> Context:
    d = DATA / name
    schema, facts = parse_instance((d / "instance.txt").read_text(), str(d / "instance.txt"))
    constraints = parse_constraints((d / "constraints.txt").read_text())
    pairs = parse_priority((d / "priority.txt").read_text()) if with_priority else ()
    return Context.build(facts, constraints, pairs, schema)


def fixture_queries(name: str) -> dict:
    return parse_queries((DATA / name / "queries.txt").read_text())


# Example 1: John's salary records and the IT manager
E40 = fact("Emp", "John", 40000, "IT")
E50 = fact("Emp", "John", 50000, "IT")
E80 = fact("Emp", "John", 80000, "IT")
MARY = fact("Mgr", "Mary", 70000, "IT")
EX1 = {
    "I1'": frozenset({E80}),
    "I2'": frozenset({E50, MARY}),
    "I3'": frozenset({E40, MARY}),
}

# Example 2: three managers with two dependencies
BOB70 = fact("Mgr", "Bob", 70000, "R&D")
BOB60 = fact("Mgr", "Bob", 60000, "AD")
MARY40 = fact("Mgr", "Mary", 40000, "IT")
MARY50 = fact("Mgr", "Mary", 50000, "PR")
KEN60 = fact("Mgr", "Ken", 60000, "IT")
KEN50 = fact("Mgr", "Ken", 50000, "PR")
EX2 = {
    "I1'": frozenset({BOB70, MARY50, KEN60}),
    "I2'": frozenset({BOB70, MARY40, KEN50}),
    "I3'": frozenset({BOB60, MARY40, KEN50}),
    "I4'": frozenset({BOB60, MARY50, KEN60}),
}

# the instance separating common from global optimality
T1 = fact("R", 1, 1, 1, 1)
T2 = fact("R", 1, 2, 1, 2)
T3 = fact("R", 1, 3, 0, 0)
T4 = fact("R", 0, 0, 1, 3)
FIG5 = {
    "I1'": frozenset({T1}),
    "I2'": frozenset({T2}),
    "I3'": frozenset({T3, T4}),
}


@pytest.fixture
def ex1() -> Context:
    return load_fixture("example1")


@pytest.fixture
def ex1_plain() -> Context:
    return load_fixture("example1", with_priority=False)


@pytest.fixture
def ex2() -> Context:
    return load_fixture("example2")


@pytest.fixture
def fig5() -> Context:
    return load_fixture("fig5")


# lines recorded by test_acceptance.py, echoed at the end of the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

from pathlib import Path

import pytest

from cooprover.modules.kernel import (
    ROLE_AXIOM,
    ROLE_GOAL,
    ArityError,
    Clause,
    ParseError,
    variant_equal,
)
from cooprover.modules.problem_io import (
    Mode,
    add_equality_axioms,
    equality_axioms,
    goal_clauses,
    parse_problem,
    read_problem,
    serialize,
)

DATA_PATH = Path("tests/data").absolute()


def test_read_problem():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    assert problem.name == "recent_trace"
    assert len(problem.clauses) == 5
    assert [c.id for c in problem.clauses] == [1, 2, 3, 4, 5]
    assert problem.clauses[0].name == "c1"
    assert str(problem.clauses[0]) == "~a | ~b | c"
    assert problem.clauses[4].role == ROLE_GOAL
    assert problem.clauses[0].role == ROLE_AXIOM
    assert not problem.has_equality


def test_parse_equality_literals():
    problem = read_problem(DATA_PATH / "congruence_k2.p")
    ab, goal = problem.clauses
    assert ab.literals[0].is_equality and ab.literals[0].positive
    assert goal.literals[0].is_equality and not goal.literals[0].positive
    assert str(goal) == "f(a) != f(b)"
    assert problem.has_equality


def test_parse_negated_disequation():
    problem = parse_problem("cnf(c, axiom, (~ a != b)).")
    assert str(problem.clauses[0]) == "a = b"


def test_parse_empty_clause():
    problem = parse_problem("cnf(c, axiom, ($false)).")
    assert problem.clauses[0].is_empty


def test_parse_comments_and_hypotheses():
    text = "% header\ncnf(h, hypothesis, (p(X) | ~q(X))). % trailing\n"
    problem = parse_problem(text)
    assert problem.clauses[0].role == ROLE_AXIOM
    assert len(problem.clauses[0]) == 2


def test_arity_error():
    with pytest.raises(ArityError) as e:
        read_problem(DATA_PATH / "bad_arity.p")
    assert e.value.line == 2
    assert e.value.column == 18
    assert e.value.symbol == "p"


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        read_problem(DATA_PATH / "bad_syntax.p")
    assert e.value.line == 1
    assert "expected ')'" in e.value.message


@pytest.mark.parametrize(
    "text",
    [
        "cnf(c, lemma, (p)).",
        "cnf(c, axiom, (X)).",
        "cnf(c, axiom, (p(a) | )).",
        "fof(c, axiom, p).",
        "cnf(c, axiom, (p # q)).",
    ],
)
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_problem(text)


def test_serialize_reads_back():
    problem = read_problem(DATA_PATH / "equational.p")
    again = parse_problem(serialize(problem))
    assert len(again.clauses) == len(problem.clauses)
    for c, d in zip(problem.clauses, again.clauses):
        assert variant_equal(c, d)
        assert c.role == d.role


def test_signature():
    problem = read_problem(DATA_PATH / "equational.p")
    assert problem.functions() == {"f": 1, "g": 1, "h": 1, "b": 0}
    assert problem.predicates() == {"=": 2}
    assert problem.is_horn


def test_equality_axioms():
    problem = read_problem(DATA_PATH / "congruence_k2.p")
    axioms = equality_axioms(problem)
    names = [c.name for c in axioms]
    assert names == [
        "eq_reflexivity",
        "eq_symmetry",
        "eq_transitivity",
        "eq_subst_f_1",
    ]
    extended = add_equality_axioms(problem)
    assert len(extended.clauses) == 6
    assert [c.id for c in extended.clauses] == [1, 2, 3, 4, 5, 6]


def test_equality_axioms_skip_pure_problems():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    assert add_equality_axioms(problem) is problem


def test_goal_clauses():
    problem = read_problem(DATA_PATH / "nine_step.p")
    negative = goal_clauses(problem, Mode.CTC_NEG)
    assert [c.name for c in negative] == ["c5"]
    assert len(goal_clauses(problem, Mode.CTC)) == 9
    assert goal_clauses(parse_problem("cnf(c, axiom, (p))."), Mode.CTC_NEG) == []


def test_extend_numbers_after_existing():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    extended = problem.extend([Clause()], ROLE_AXIOM)
    assert extended.clauses[-1].id == 6
    assert extended.clauses[-1].is_empty
    assert extended.name == problem.name

from dataclasses import replace
from pathlib import Path
from time import localtime, strftime

import pytest

from cooprover.modules.logger import CooproverLogger
from cooprover.modules.problem_io import (
    Mode,
    add_equality_axioms,
    parse_problem,
    read_problem,
)
from cooprover.modules.tableau import (
    CLOSED,
    EXHAUSTED,
    EXTENSION,
    LIMIT,
    START,
    Bound,
    BoundKind,
    Tableau,
    TableauProver,
    enumerate_subgoal_clauses,
    expand_tableau,
    prove,
    replay_tableau_proof,
    within_bound,
)

LOGS_PATH = Path("tests/logs").absolute()
DATA_PATH = Path("tests/data").absolute()

start_time = strftime(r"%Y-%m-%d_%H%M%S", localtime())
logger = CooproverLogger(LOGS_PATH, "test_tableau", start_time, 0)


def clauses(text):
    return set(parse_problem(text).clauses)


def test_prove_closes_and_replays():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    result = prove(problem, logger=logger)
    assert result.status == CLOSED
    assert result.resource == 6
    assert result.proof.inferences == 6
    assert result.proof.steps[0].rule == START
    assert len(result.proof.lines) == 6
    assert replay_tableau_proof(problem, result.proof)


def test_replay_rejects_tampered_proof():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    proof = prove(problem, logger=logger).proof
    steps = list(proof.steps)
    steps[1] = replace(steps[1], clause_id=4)
    assert not replay_tableau_proof(problem, replace(proof, steps=tuple(steps)))
    assert not replay_tableau_proof(problem, replace(proof, steps=proof.steps[:-1]))


def test_prove_exhausts_satisfiable_horn_problem():
    problem = read_problem(DATA_PATH / "two_branches.p")
    result = prove(problem, logger=logger)
    assert result.status == EXHAUSTED
    assert result.proof is None


def test_prove_with_equality_axioms():
    problem = add_equality_axioms(read_problem(DATA_PATH / "equational.p"))
    result = prove(problem, max_resource=6, logger=logger)
    assert result.status == CLOSED
    assert result.proof.inferences <= 6
    assert replay_tableau_proof(problem, result.proof)


def test_prove_non_horn_needs_reductions():
    problem = read_problem(DATA_PATH / "pigeonhole_2.p")
    result = prove(problem, logger=logger)
    assert result.status == CLOSED
    assert replay_tableau_proof(problem, result.proof)


def test_prove_respects_attempt_limit():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    result = TableauProver(problem, logger).prove(max_attempts=2)
    assert result.status == LIMIT


def test_prove_without_start_clauses():
    problem = parse_problem("cnf(c, axiom, (p)).")
    assert prove(problem, logger=logger).status == EXHAUSTED


@pytest.mark.parametrize("kind", list(BoundKind))
def test_bounds_find_the_same_problem(kind):
    problem = read_problem(DATA_PATH / "recent_trace.p")
    result = prove(problem, bound=Bound(kind), logger=logger)
    assert result.status == CLOSED
    assert replay_tableau_proof(problem, result.proof)


def test_weighted_bound_caps():
    bound = Bound(BoundKind.WEIGHTED, 0.5, 2.0)
    assert bound.caps(5) == (3, 10)
    with pytest.raises(ValueError):
        Bound(BoundKind.WEIGHTED, 0.0, 1.0)


def test_enumerate_two_branches():
    problem = read_problem(DATA_PATH / "two_branches.p")
    records = enumerate_subgoal_clauses(problem, 2, Mode.CTC, logger=logger)
    assert {r.clause for r in records} == clauses(
        "cnf(a, axiom, (~p1 | ~p2)). cnf(b, axiom, (~q1 | ~q2))."
    )
    assert all(r.inference_count == 2 for r in records)

    # only ~g is all-negative, so every tableau starts there
    negated = enumerate_subgoal_clauses(problem, 2, Mode.CTC_NEG, logger=logger)
    assert {r.clause for r in negated} == {r.clause for r in records}
    assert all(r.start_clause == 1 for r in negated)
    assert all(r.inference_count == 2 for r in negated)


def test_enumerate_negative_start():
    problem = read_problem(DATA_PATH / "nine_step.p")
    records = enumerate_subgoal_clauses(problem, 2, Mode.CTC_NEG, logger=logger)
    assert {r.clause for r in records} == clauses(
        """
        cnf(s1, axiom, (~l2 | l6 | l7)).
        cnf(s2, axiom, (~l2 | l6 | ~l7)).
        cnf(s3, axiom, (l1 | ~l3 | ~l4)).
        cnf(s4, axiom, (~l1 | ~l3 | ~l4)).
        cnf(s5, axiom, (~l2 | ~l5 | ~l6)).
        """
    )
    assert all(r.start_clause == 5 for r in records)
    assert all(len(r.tableau_clauses) == 2 for r in records)


def test_enumerate_excludes_input_variants_and_keeps_fewest_inferences():
    problem = read_problem(DATA_PATH / "nine_step.p")
    records = enumerate_subgoal_clauses(problem, 3, Mode.CTC_NEG, logger=logger)
    texts = [str(r.clause) for r in records]
    assert len(texts) == len(set(texts))
    assert all(r.clause not in set(problem.clauses) for r in records)
    two = {r.clause for r in enumerate_subgoal_clauses(problem, 2, logger=logger)}
    for r in records:
        if r.clause in two:
            assert r.inference_count == 2


def test_enumerate_reports_closed_tableau():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    prover = TableauProver(problem, logger, regularity=False)
    prover.enumerate(6, Mode.CTC_NEG)
    assert prover.proof_found is not None
    assert replay_tableau_proof(problem, prover.proof_found)


def test_enumerate_cap_and_bad_resource():
    problem = read_problem(DATA_PATH / "nine_step.p")
    assert len(enumerate_subgoal_clauses(problem, 3, cap=2, logger=logger)) == 2
    with pytest.raises(ValueError):
        enumerate_subgoal_clauses(problem, 0)


def test_expand_tableau_is_functional():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    goal = problem.clauses[4]
    started = expand_tableau(Tableau(), START, arg=goal)
    assert started.inference_count == 1
    leaf = started.open_leaves[0]
    extended = expand_tableau(started, EXTENSION, leaf, problem.clauses[0])
    assert started.inference_count == 1
    assert extended.inference_count == 2
    assert extended.subgoal_clause() == parse_problem(
        "cnf(s, axiom, (~a | ~b))."
    ).clauses[0]
    assert expand_tableau(started, EXTENSION, leaf, problem.clauses[2]) is None


def test_within_bound():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    started = expand_tableau(Tableau(), START, arg=problem.clauses[4])
    extended = expand_tableau(
        started, EXTENSION, started.open_leaves[0], problem.clauses[0]
    )
    assert extended.max_inner_depth == 1
    assert within_bound(extended, Bound(BoundKind.INFERENCE), 2)
    assert not within_bound(extended, Bound(BoundKind.INFERENCE), 1)
    assert within_bound(extended, Bound(BoundKind.DEPTH), 1)
    assert not within_bound(extended, Bound(BoundKind.DEPTH), 0)
    # weighted caps for resource 1 are (1, 2)
    assert within_bound(extended, Bound(BoundKind.WEIGHTED), 1)
    assert within_bound(started, Bound(BoundKind.DEPTH), 0)

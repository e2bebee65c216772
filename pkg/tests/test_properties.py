from pathlib import Path
from time import localtime, monotonic, strftime

import numpy as np
import pytest

from cooprover.modules.kernel import App, OracleBudgetExceeded, Var, apply, unify
from cooprover.modules.lemmas import LemmaSelector, candidates_from_state
from cooprover.modules.logger import CooproverLogger
from cooprover.modules.oracle import entails, is_satisfiable, min_proof_length
from cooprover.modules.problem_io import (
    Mode,
    add_equality_axioms,
    parse_problem,
    read_problem,
)
from cooprover.modules.saturation import REFUTATION, SaturationProver, saturate
from cooprover.modules.tableau import (
    CLOSED,
    TableauProver,
    enumerate_subgoal_clauses,
    replay_tableau_proof,
)

LOGS_PATH = Path("tests/logs").absolute()
DATA_PATH = Path("tests/data").absolute()

start_time = strftime(r"%Y-%m-%d_%H%M%S", localtime())
logger = CooproverLogger(LOGS_PATH, "test_properties", start_time, 2)

VARIABLES = [Var("X"), Var("Y"), Var("Z")]
FUNCTIONS = [("a", 0), ("b", 0), ("f", 1), ("g", 2)]


def random_term(rng: np.random.Generator, depth: int):
    if depth == 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return VARIABLES[rng.integers(len(VARIABLES))]
        return App(FUNCTIONS[rng.integers(2)][0])
    symbol, arity = FUNCTIONS[rng.integers(len(FUNCTIONS))]
    return App(symbol, tuple(random_term(rng, depth - 1) for _ in range(arity)))


def random_ground_problem(rng: np.random.Generator, atoms: int, clauses: int):
    """An unsatisfiable set of propositional clauses, □ excluded."""
    while True:
        lines = []
        for n in range(clauses):
            width = rng.integers(1, min(3, atoms) + 1)
            chosen = rng.choice(atoms, size=width, replace=False)
            literals = [
                f"{'~' if rng.random() < 0.5 else ''}x{i}" for i in sorted(chosen)
            ]
            lines.append(f"cnf(c{n + 1},axiom,({' | '.join(literals)})).")
        problem = parse_problem("\n".join(lines), "random")
        if not is_satisfiable(problem.clauses):
            return problem


def test_unifier_equates_terms():
    rng = np.random.default_rng(7)
    unified = 0
    for _ in range(500):
        s, t = random_term(rng, 4), random_term(rng, 4)
        sigma = unify(s, t)
        if sigma is None:
            continue
        unified += 1
        assert apply(sigma, s) == apply(sigma, t)
        # idempotent
        assert apply(sigma, apply(sigma, s)) == apply(sigma, s)
    assert unified > 0


@pytest.mark.slow
def test_saturation_refutes_unsatisfiable_sets():
    rng = np.random.default_rng(11)
    for _ in range(50):
        problem = random_ground_problem(rng, rng.integers(2, 9), rng.integers(4, 12))
        result = saturate(problem, max_activations=5000)
        assert result.status == REFUTATION


@pytest.mark.slow
def test_subgoal_clauses_shorten_proofs():
    rng = np.random.default_rng(3)
    checked, attempts = 0, 0
    while checked < 50 and attempts < 500:
        attempts += 1
        problem = random_ground_problem(rng, rng.integers(2, 5), rng.integers(3, 7))
        try:
            before = min_proof_length(problem, max_length=8)
            if before is None or before < 2:
                continue
            records = enumerate_subgoal_clauses(problem, 2, Mode.CTC)
            extended = problem.extend([r.clause for r in records])
            after = min_proof_length(extended, max_length=before)
        except OracleBudgetExceeded:
            continue
        checked += 1
        assert after is not None and after < before
    assert checked >= 50


@pytest.mark.slow
def test_transferred_clauses_are_entailed():
    rng = np.random.default_rng(5)
    for _ in range(100):
        problem = random_ground_problem(rng, rng.integers(2, 7), rng.integers(3, 9))
        records = enumerate_subgoal_clauses(problem, 3, Mode.CTC_NEG)
        for r in records:
            assert entails(problem.clauses, r.clause)

        prover = SaturationProver(problem, logger=logger)
        prover.preprocess(30)
        facts = candidates_from_state(prover.state)
        for fact in facts:
            assert entails(problem.clauses, fact.fact)
        selected = LemmaSelector(logger=logger).select(
            facts, [r.clause for r in records], False, prover.state.derivations
        )
        assert {s.clause for s in selected} <= {f.fact for f in facts}


REFUTABLE = [
    "recent_trace",
    "nine_step",
    "pigeonhole_2",
    "equational",
    "congruence_k2",
    "congruence_k3",
    "buried_goal",
    "factoring_k2",
    "split_weight",
]


def battery_problem(source):
    if isinstance(source, str):
        return read_problem(DATA_PATH / f"{source}.p")
    rng = np.random.default_rng(source)
    return random_ground_problem(rng, rng.integers(2, 7), rng.integers(4, 10))


@pytest.mark.slow
@pytest.mark.parametrize("source", REFUTABLE + list(range(100, 116)))
def test_both_engines_refute(source):
    problem = battery_problem(source)
    me_problem = add_equality_axioms(problem)
    tableau = TableauProver(me_problem, logger).prove(
        Mode.CTC_NEG, deadline=monotonic() + 60
    )
    assert tableau.status == CLOSED
    assert replay_tableau_proof(me_problem, tableau.proof)

    saturation = saturate(problem, max_activations=5000)
    assert saturation.status == REFUTATION

from pathlib import Path
from time import localtime, strftime

import numpy as np
import pytest

from cooprover.modules.kernel import ROLE_AXIOM, ConfigError
from cooprover.modules.logger import CooproverLogger
from cooprover.modules.problem_io import Mode, parse_problem, read_problem
from cooprover.modules.subgoals import (
    SelectionWeights,
    SubgoalGenerator,
    generate_variant1,
    generate_variant2,
    merge_records,
    phi,
    psi,
    score_matrix,
    select_subgoal_clauses,
    sim,
    theta,
    unit_clauses,
)
from cooprover.modules.tableau import SubgoalClauseRecord

LOGS_PATH = Path("tests/logs").absolute()
DATA_PATH = Path("tests/data").absolute()

start_time = strftime(r"%Y-%m-%d_%H%M%S", localtime())
logger = CooproverLogger(LOGS_PATH, "test_subgoals", start_time, 0)

SMALL = SelectionWeights(k=3, k1=2, k2=2, nsg=100, nref=2, m=3)


def clause(text):
    return parse_problem(f"cnf(c, axiom, ({text})).").clauses[0]


def record(text, inferences=2, tableau=("p",)):
    return SubgoalClauseRecord(
        clause(text), inferences, tuple(clause(t) for t in tableau)
    )


def test_selection_weights_validation():
    assert np.array_equal(SelectionWeights().alphas, np.array([10.0, 5.0, 1.0]))
    with pytest.raises(ConfigError):
        SelectionWeights(alpha1=1.0, alpha2=5.0, alpha3=1.0)
    with pytest.raises(ConfigError):
        SelectionWeights(alpha1=3.0, alpha2=2.0, alpha3=-1.0)
    with pytest.raises(ConfigError):
        SelectionWeights(m=-1)


def test_theta():
    # 2 variable occurrences, 2 symbol occurrences
    assert theta(clause("~p(X, f(X))")) == 2 + 2 * 2
    assert theta(clause("q")) == 2


def test_sim():
    unit = clause("p(a)")
    assert sim(clause("~p(a) | q"), unit) == 1.0
    assert sim(clause("~p(f(a))"), unit) == pytest.approx(1 / 3)
    assert sim(clause("p(a)"), unit) == 0.0
    assert sim(clause("~q(a)"), unit) == 0.0
    with pytest.raises(ValueError):
        sim(clause("~p(a)"), clause("p(a) | q"))


def test_psi_and_phi():
    r = record("~q(a)", inferences=3, tableau=("p", "q(a) | r(b)"))
    units = [clause("q(a)")]
    weights = SelectionWeights()
    # I = 3, max weight = 4, sim = 1
    assert psi(r, units=units, weights=weights) == 10 * 3 + 5 * 4 + 1 * 1
    assert phi(r, units=units, weights=weights) == 51 - theta(r.clause)
    matrix = score_matrix([r], lambda c: len(c), units)
    assert matrix.shape == (1, 3)
    assert list(matrix[0]) == [3.0, 2.0, 1.0]


def test_select_ranks_by_phi_then_theta_then_text():
    candidates = [
        record("~p(X)", inferences=2),
        record("~q(f(f(a)))", inferences=2),
        record("~r(X, Y)", inferences=4),
        record("~s(X)", inferences=2),
    ]
    selected = select_subgoal_clauses(candidates, 3)
    texts = [str(s.record.clause) for s in selected]
    assert texts == ["~r(X,Y)", "~p(X)", "~s(X)"]
    assert all(s.clause.role == ROLE_AXIOM for s in selected)
    assert selected[0].phi >= selected[1].phi >= selected[2].phi
    assert select_subgoal_clauses(candidates, 0) == []
    assert select_subgoal_clauses([], 5) == []


def test_select_is_deterministic():
    problem = read_problem(DATA_PATH / "nine_step.p")
    candidates = generate_variant1(problem, Mode.CTC_NEG, SMALL, logger)
    first = select_subgoal_clauses(candidates, 3, unit_clauses(problem))
    second = select_subgoal_clauses(list(reversed(candidates)), 3, unit_clauses(problem))
    assert [s.record.clause for s in first] == [s.record.clause for s in second]


def test_variant1_respects_cap():
    problem = read_problem(DATA_PATH / "nine_step.p")
    capped = SelectionWeights(k=3, nsg=4)
    assert len(generate_variant1(problem, Mode.CTC_NEG, capped, logger)) == 4


def test_variant2_refines_best_candidates():
    problem = read_problem(DATA_PATH / "nine_step.p")
    first = generate_variant1(problem, Mode.CTC_NEG, SelectionWeights(k=2), logger)
    refined = generate_variant2(problem, Mode.CTC_NEG, weights=SMALL, logger=logger)
    assert {r.clause for r in first} <= {r.clause for r in refined}
    assert len(refined) > len(first)
    deeper = [r for r in refined if r.inference_count > 2]
    assert deeper
    for r in deeper:
        assert r.start_clause == 5
        assert len(r.tableau_clauses) >= 3


def test_generator_reports_closed_tableau():
    problem = read_problem(DATA_PATH / "recent_trace.p")
    generator = SubgoalGenerator(
        problem, SelectionWeights(k=6), Mode.CTC_NEG, logger=logger
    )
    generator.generate(1)
    assert generator.proof_found is not None
    with pytest.raises(ValueError):
        generator.generate(3)


def test_merge_records_keeps_fewest_inferences():
    merged = merge_records(
        [record("~p(X)", 4), record("~p(Y)", 2), record("~q", 3)]
    )
    assert [(str(r.clause), r.inference_count) for r in merged] == [
        ("~p(Y)", 2),
        ("~q", 3),
    ]

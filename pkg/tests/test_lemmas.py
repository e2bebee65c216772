from pathlib import Path
from time import localtime, strftime

import pytest

from cooprover.modules.kernel import Clause, ConfigError, Literal, Var
from cooprover.modules.lemmas import (
    FILTER_CONTEXT,
    FILTER_DERIVATION,
    FILTER_STATISTIC,
    DerivationDepth,
    FilterQuotas,
    LemmaCandidate,
    LemmaSelector,
    candidates_from_state,
    gamma,
    psi_c,
    psi_d,
    psi_s,
    select_lemmas,
)
from cooprover.modules.logger import CooproverLogger
from cooprover.modules.problem_io import parse_problem, read_problem
from cooprover.modules.saturation import (
    DerivationRecord,
    Rule,
    SplitWeightHeuristic,
    preprocess,
)

LOGS_PATH = Path("tests/logs").absolute()
DATA_PATH = Path("tests/data").absolute()

start_time = strftime(r"%Y-%m-%d_%H%M%S", localtime())
logger = CooproverLogger(LOGS_PATH, "test_lemmas", start_time, 0)


def clause(text, id=0):
    return parse_problem(f"cnf(c, axiom, ({text})).").clauses[0].with_id(id)


def candidate(text, id, epsilon=0, kappa=0):
    return LemmaCandidate(clause(text, id), epsilon, kappa)


DERIVATIONS = {
    1: DerivationRecord(Rule.INPUT),
    2: DerivationRecord(Rule.SUPERPOSITION, (1, 4)),
    3: DerivationRecord(Rule.INPUT),
    4: DerivationRecord(Rule.INPUT),
    5: DerivationRecord(Rule.SUPERPOSITION, (2,)),
    6: DerivationRecord(Rule.RESOLUTION, (5, 2)),
}


def test_candidate_must_be_positive_unit():
    with pytest.raises(ValueError):
        candidate("~p(a)", 1)
    with pytest.raises(ValueError):
        candidate("p(a) | q", 1)
    with pytest.raises(ConfigError):
        FilterQuotas(per_filter=-1)


def test_psi_s():
    assert psi_s(candidate("p(a)", 1, epsilon=2, kappa=5)) == 3


def test_derivation_depth_counts_superposition_steps():
    depth = DerivationDepth(DERIVATIONS)
    assert depth(1) == 0
    assert depth(2) == 1
    # self-superposition uses its premise twice
    assert depth(5) == 3
    assert depth(6) == 4
    assert psi_d(candidate("p(a)", 6), DERIVATIONS) == 4


def test_gamma():
    assert gamma(Literal(True, "p", (Var("X"),))) == pytest.approx(0.4)
    assert gamma(clause("p(a)").literals[0]) == pytest.approx(0.2)
    assert gamma(clause("p(a)").literals[0], (10.0, 1.0)) == 1.0


def test_psi_c():
    lemma = candidate("p(a)", 1)
    assert psi_c(lemma, clause("~p(X) | q(X)")) == pytest.approx(-1.0)
    assert psi_c(lemma, clause("~p(X)")) == pytest.approx(-0.2)
    assert psi_c(lemma, clause("~q(a)")) == 0.0
    assert psi_c(lemma, clause("p(X)")) == 0.0


def test_psi_c_solves_several_literals_at_once():
    lemma = candidate("p(a)", 1)
    # both p literals are solved by one instance
    assert psi_c(lemma, clause("~p(X) | ~p(a) | q(X)")) == pytest.approx(-1.2)


def test_psi_c_greedy_on_wide_subgoal():
    wide = Clause(tuple(Literal(False, "p", (Var(f"X{i}"),)) for i in range(13)))
    assert psi_c(candidate("p(a)", 1), wide) == pytest.approx(-2.6)


def test_selector_filters():
    facts = [
        candidate("p(a)", 1, epsilon=0, kappa=5),
        candidate("q(b)", 2, epsilon=3, kappa=0),
        candidate("r(a)", 3),
    ]
    pool = [clause("~r(X)")]
    selector = LemmaSelector(FilterQuotas(per_filter=1), logger)

    selected = selector.select(facts, pool, has_equality=False)
    assert [(str(s.clause), s.filter) for s in selected] == [
        ("p(a)", FILTER_STATISTIC),
        ("r(a)", FILTER_CONTEXT),
    ]

    selected = selector.select(facts, pool, True, DERIVATIONS)
    assert [(str(s.clause), s.filter) for s in selected] == [
        ("p(a)", FILTER_STATISTIC),
        ("q(b)", FILTER_DERIVATION),
        ("r(a)", FILTER_CONTEXT),
    ]
    assert selected[1].psi_d == 1
    assert all(s.clause.role == "axiom" for s in selected)


def test_selector_unions_duplicates_and_respects_quota():
    facts = [candidate("p(a)", 1, kappa=5), candidate("p(b)", 2, kappa=1)]
    pool = [clause("~p(a)"), clause("~p(b)")]
    selected = select_lemmas(facts, pool, FilterQuotas(per_filter=1), logger=logger)
    # p(a) wins both the statistic and the first context slot
    assert [str(s.clause) for s in selected] == ["p(a)"]
    assert select_lemmas(facts, pool, FilterQuotas(per_filter=0)) == []


def test_candidates_from_state():
    problem = read_problem(DATA_PATH / "split_weight.p")
    _, state = preprocess(problem, 3, SplitWeightHeuristic(3), logger=logger)
    found = candidates_from_state(state)
    assert [str(c.fact) for c in found] == ["p(a)", "p(f(a))"]
    assert found[0].epsilon >= 1

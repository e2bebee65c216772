"""
Scoring and selection of subgoal clauses for transfer to the saturation
prover.
"""

import logging
from dataclasses import dataclass, replace
from logging import Logger
from typing import Callable

import numpy as np

from cooprover.modules.kernel import (
    ROLE_AXIOM,
    Clause,
    ConfigError,
    measures,
    skeleton_key,
    symbol_occurrences,
    variant_equal,
)
from cooprover.modules.problem_io import Mode, Problem
from cooprover.modules.saturation import Heuristic
from cooprover.modules.tableau import SubgoalClauseRecord, TableauProof, TableauProver

Weight = Callable[[Clause], float]


@dataclass(frozen=True)
class SelectionWeights:
    alpha1: float = 10.0
    alpha2: float = 5.0
    alpha3: float = 1.0
    k: int = 10
    k1: int = 9
    k2: int = 9
    nsg: int = 500
    nref: int = 5
    m: int = 30

    def __post_init__(self):
        if not self.alpha1 > self.alpha2 > self.alpha3 >= 0:
            raise ConfigError(
                "selection weights need alpha1 > alpha2 > alpha3 >= 0, got "
                f"({self.alpha1}, {self.alpha2}, {self.alpha3})"
            )
        for name in ("k", "k1", "k2", "nsg", "nref", "m"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")

    @property
    def alphas(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.alpha3], dtype=float)


@dataclass(frozen=True)
class ScoredSubgoal:
    record: SubgoalClauseRecord
    psi: float
    theta: int
    phi: float

    @property
    def clause(self) -> Clause:
        return self.record.clause.with_id(self.record.clause.id, ROLE_AXIOM)


def default_weight(clause: Clause) -> float:
    return Heuristic().weight(clause)


def sim(s: Clause, u: Clause) -> float:
    """
    Closeness of S to being solved by the unit U: best over literals of S
    that are complementary in sign and predicate to U's literal.
    """
    if not u.is_unit:
        raise ValueError("sim needs a unit clause")
    unit = u.literals[0]
    unit_occ = symbol_occurrences(unit)
    unit_depth = measures(unit).max_depth
    best = 0.0
    for lit in s:
        if lit.predicate != unit.predicate or lit.positive == unit.positive:
            continue
        occ = symbol_occurrences(lit)
        mismatch = sum(
            abs(occ.get(f, 0) - unit_occ.get(f, 0)) for f in set(occ) | set(unit_occ)
        )
        gap = abs(measures(lit).max_depth - unit_depth)
        best = max(best, 1.0 / (1 + mismatch + gap))
    return best


def theta(s: Clause) -> int:
    """Variable occurrences plus twice the symbol occurrences."""
    m = measures(s)
    return m.var_occurrences + 2 * (m.symbol_count - m.var_occurrences)


def score_matrix(
    records: list[SubgoalClauseRecord], weight: Weight, units: list[Clause]
) -> np.ndarray:
    """Columns: I, max tableau clause weight, max sim against units."""
    rows = np.zeros((len(records), 3), dtype=float)
    for idx, r in enumerate(records):
        rows[idx, 0] = r.inference_count
        rows[idx, 1] = max((weight(c) for c in r.tableau_clauses), default=0)
        rows[idx, 2] = max((sim(r.clause, u) for u in units), default=0.0)
    return rows


def psi(
    record: SubgoalClauseRecord,
    weight: Weight = default_weight,
    units: list[Clause] = (),
    weights: SelectionWeights = SelectionWeights(),
) -> float:
    return float(score_matrix([record], weight, list(units))[0] @ weights.alphas)


def phi(
    record: SubgoalClauseRecord,
    weight: Weight = default_weight,
    units: list[Clause] = (),
    weights: SelectionWeights = SelectionWeights(),
) -> float:
    return psi(record, weight, units, weights) - theta(record.clause)


def score(
    records: list[SubgoalClauseRecord],
    weight: Weight,
    units: list[Clause],
    weights: SelectionWeights,
) -> list[ScoredSubgoal]:
    if not records:
        return []
    psis = score_matrix(records, weight, units) @ weights.alphas
    thetas = np.array([theta(r.clause) for r in records])
    phis = psis - thetas
    return [
        ScoredSubgoal(r, float(p), int(t), float(f))
        for r, p, t, f in zip(records, psis, thetas, phis)
    ]


def _rank(scored: list[ScoredSubgoal], key: str) -> list[ScoredSubgoal]:
    return sorted(
        scored, key=lambda s: (-getattr(s, key), s.theta, str(s.record.clause))
    )


def unit_clauses(problem: Problem) -> list[Clause]:
    return [c for c in problem.clauses if c.is_unit]


def merge_records(records: list[SubgoalClauseRecord]) -> list[SubgoalClauseRecord]:
    """Drop variants, keeping the first record with the fewest inferences."""
    kept: list[SubgoalClauseRecord] = []
    buckets: dict = {}
    for r in records:
        bucket = buckets.setdefault(skeleton_key(r.clause), [])
        for pos in bucket:
            if variant_equal(kept[pos].clause, r.clause):
                if kept[pos].inference_count > r.inference_count:
                    kept[pos] = r
                break
        else:
            bucket.append(len(kept))
            kept.append(r)
    return kept


class SubgoalGenerator(object):
    """Candidate generation over the top-down prover's search tree."""

    def __init__(
        self,
        problem: Problem,
        weights: SelectionWeights = SelectionWeights(),
        mode: Mode = Mode.CTC_NEG,
        weight: Weight = default_weight,
        logger: Logger | None = None,
        verbose: bool = False,
    ):
        self.problem = problem
        self.weights = weights
        self.mode = Mode(mode)
        self.weight = weight
        self.logger = logger or logging.getLogger("cooprover")
        self.verbose = verbose
        self.units = unit_clauses(problem)
        self.proof_found: TableauProof | None = None

    def _enumerate(self, k: int, start_set=None, cap=None, stop=None):
        if k < 1:
            raise ValueError("resource must be at least 1")
        prover = TableauProver(self.problem, self.logger, self.verbose, regularity=False)
        records = prover.enumerate(k, self.mode, start_set, cap, stop=stop)
        if prover.proof_found is not None and self.proof_found is None:
            self.proof_found = prover.proof_found
        return records

    def variant1(self, stop=None) -> list[SubgoalClauseRecord]:
        return self._enumerate(self.weights.k, cap=self.weights.nsg, stop=stop)

    def variant2(self, stop=None) -> list[SubgoalClauseRecord]:
        w = self.weights
        first = self._enumerate(w.k1, stop=stop)
        if stop is not None and stop():
            return merge_records(first)
        refine = _rank(score(first, self.weight, self.units, w), "psi")[: w.nref]
        self.logger.debug(
            f"Refining {len(refine)} subgoal clauses with resource {w.k2}"
        )
        second = []
        for scored in refine:
            parent = scored.record
            for r in self._enumerate(w.k2, start_set=[parent.clause], stop=stop):
                second.append(
                    replace(
                        r,
                        inference_count=r.inference_count + parent.inference_count,
                        tableau_clauses=parent.tableau_clauses + r.tableau_clauses,
                        start_clause=parent.start_clause,
                    )
                )
        return merge_records(first + second)

    def generate(self, variant: int = 2, stop=None) -> list[SubgoalClauseRecord]:
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tProblem: {self.problem.name}"
            f"\n\tVariant: {variant}"
            f"\n\tMode: {self.mode.value}"
            f"\n\tWeights: {self.weights}\n"
        )
        if variant == 1:
            return self.variant1(stop)
        if variant == 2:
            return self.variant2(stop)
        raise ValueError(f"unknown generation variant {variant}")

    def select(self, candidates: list[SubgoalClauseRecord], m: int | None = None):
        m = self.weights.m if m is None else m
        return select_subgoal_clauses(
            candidates, m, self.units, self.weights, self.weight
        )


def generate_variant1(
    problem: Problem,
    mode: Mode = Mode.CTC_NEG,
    weights: SelectionWeights = SelectionWeights(),
    logger: Logger | None = None,
) -> list[SubgoalClauseRecord]:
    return SubgoalGenerator(problem, weights, mode, logger=logger).variant1()


def generate_variant2(
    problem: Problem,
    mode: Mode = Mode.CTC_NEG,
    weight: Weight = default_weight,
    weights: SelectionWeights = SelectionWeights(),
    logger: Logger | None = None,
) -> list[SubgoalClauseRecord]:
    return SubgoalGenerator(problem, weights, mode, weight, logger).variant2()


def select_subgoal_clauses(
    candidates: list[SubgoalClauseRecord],
    m: int,
    units: list[Clause] = (),
    weights: SelectionWeights = SelectionWeights(),
    weight: Weight = default_weight,
) -> list[ScoredSubgoal]:
    """The m candidates of highest phi; ties by smaller theta, then text."""
    scored = score(list(candidates), weight, list(units), weights)
    return _rank(scored, "phi")[:m]

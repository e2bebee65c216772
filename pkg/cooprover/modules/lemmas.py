"""
Lemma extraction from a saturation run and the three relevancy filters
used to choose the facts handed to the top-down prover.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from logging import Logger

from cooprover.modules.kernel import (
    ROLE_AXIOM,
    Clause,
    ConfigError,
    Literal,
    apply,
    literal_size,
    measures,
    rename_apart,
    unify,
)
from cooprover.modules.saturation import DerivationRecord, ProverState, Rule

FILTER_STATISTIC = "statistic"
FILTER_DERIVATION = "derivation"
FILTER_CONTEXT = "context"

MAX_EXHAUSTIVE = 12


@dataclass(frozen=True)
class LemmaCandidate:
    fact: Clause
    epsilon: int = 0
    kappa: int = 0

    def __post_init__(self):
        if not self.fact.is_fact:
            raise ValueError(f"lemma must be a positive unit clause: {self.fact}")

    @property
    def literal(self) -> Literal:
        return self.fact.literals[0]


@dataclass(frozen=True)
class FilterQuotas:
    per_filter: int = 10
    # numerator and denominator offsets of the generality measure
    gamma_params: tuple = (1.0, 1.0)

    def __post_init__(self):
        if self.per_filter < 0:
            raise ConfigError("per_filter must be nonnegative")


@dataclass(frozen=True)
class SelectedLemma:
    candidate: LemmaCandidate
    filter: str
    score: float
    psi_d: int = 0

    @property
    def clause(self) -> Clause:
        return self.candidate.fact.with_id(self.candidate.fact.id, ROLE_AXIOM)


def candidates_from_state(state: ProverState) -> list[LemmaCandidate]:
    """Active facts in activation order with their participation counts."""
    found = []
    for clause in state.trace:
        if clause.id in state.active and clause.is_fact:
            record = state.derivations[clause.id]
            found.append(LemmaCandidate(clause, record.epsilon, record.kappa))
    return found


def psi_s(c: LemmaCandidate) -> int:
    return c.kappa - c.epsilon


class DerivationDepth(object):
    """Superposition steps in a clause's derivation tree, memoized per id."""

    def __init__(self, derivations: dict[int, DerivationRecord]):
        self.derivations = derivations
        self.memo: dict[int, int] = {}

    def __call__(self, clause_id: int) -> int:
        if clause_id in self.memo:
            return self.memo[clause_id]
        # iterative post-order; derivation chains can be long
        stack = [(clause_id, False)]
        while stack:
            cid, expanded = stack.pop()
            if cid in self.memo:
                continue
            record = self.derivations.get(cid)
            if record is None or record.rule == Rule.INPUT:
                self.memo[cid] = 0
                continue
            if not expanded:
                stack.append((cid, True))
                stack.extend((p, False) for p in record.premises if p not in self.memo)
                continue
            value = sum(self.memo[p] for p in record.premises)
            if record.rule == Rule.SUPERPOSITION:
                if len(record.premises) == 1:
                    # self-superposition uses the same clause twice
                    value *= 2
                value += 1
            self.memo[cid] = value
        return self.memo[clause_id]


def psi_d(c: LemmaCandidate, derivations: dict[int, DerivationRecord]) -> int:
    return DerivationDepth(derivations)(c.fact.id)


def gamma(lit: Literal, params: tuple = (1.0, 1.0)) -> float:
    """Generality of a literal: many variables, few symbols, flat terms."""
    num, den = params
    m = measures(lit)
    return min(1.0, (num + m.distinct_vars) / (den + m.symbol_count + m.max_depth))


def _solvable(u: Literal, lit: Literal) -> bool:
    return u.predicate == lit.predicate and u.positive != lit.positive


def _unifier(subset, sg: Clause, lit: Literal):
    sigma: dict | None = {}
    for idx in subset:
        sigma = unify(sg.literals[idx], lit, sigma)
        if sigma is None:
            return None
    return sigma


def _gain(subset, sg: Clause, sigma) -> float:
    growth = sum(
        literal_size(apply(sigma, sg.literals[idx])) - literal_size(sg.literals[idx])
        for idx in subset
    )
    return len(subset) / (1 + growth)


def _best_solution(sg: Clause, lit: Literal):
    """(U, σ) maximizing the solved-literal gain; None if nothing unifies."""
    usable = [i for i, u in enumerate(sg.literals) if _solvable(u, lit)]
    best = None

    def consider(subset):
        nonlocal best
        sigma = _unifier(subset, sg, lit)
        if sigma is None:
            return None
        key = (-_gain(subset, sg, sigma), -len(subset), subset)
        if best is None or key < best[0]:
            best = (key, subset, sigma)
        return sigma

    if len(usable) <= MAX_EXHAUSTIVE:
        for size in range(1, len(usable) + 1):
            for subset in combinations(usable, size):
                consider(subset)
    else:
        subset: tuple = ()
        current = -1.0
        while True:
            step = None
            for idx in usable:
                if idx in subset:
                    continue
                trial = tuple(sorted(subset + (idx,)))
                sigma = _unifier(trial, sg, lit)
                if sigma is None:
                    continue
                g = _gain(trial, sg, sigma)
                if g > current:
                    current, step = g, trial
            if step is None:
                break
            subset = step
            consider(subset)
    return None if best is None else best[1:]


def psi_c(
    c: LemmaCandidate, sg: Clause, quotas: FilterQuotas = FilterQuotas()
) -> float:
    """
    How well the lemma solves part of the subgoal clause: generality of
    the remaining literals minus that of the solved ones, minus the
    number remaining. Zero when no literal can be solved.
    """
    fact = rename_apart(c.fact, sg.variables)
    lit = fact.literals[0]
    found = _best_solution(sg, lit)
    if found is None:
        return 0.0
    subset, sigma = found
    rest = [l for i, l in enumerate(sg.literals) if i not in subset]
    return (
        sum(gamma(apply(sigma, r), quotas.gamma_params) for r in rest)
        - sum(
            gamma(apply(sigma, sg.literals[i]), quotas.gamma_params) for i in subset
        )
        - len(rest)
    )


def _applicable(c: LemmaCandidate, sg: Clause) -> bool:
    lit = rename_apart(c.fact, sg.variables).literals[0]
    return any(
        _solvable(u, lit) and unify(u, lit) is not None for u in sg.literals
    )


class LemmaSelector(object):
    def __init__(
        self,
        quotas: FilterQuotas = FilterQuotas(),
        logger: Logger | None = None,
        verbose: bool = False,
    ):
        self.quotas = quotas
        self.logger = logger or logging.getLogger("cooprover")
        self.verbose = verbose

    def select(
        self,
        facts: list[LemmaCandidate],
        subgoal_pool: list[Clause],
        has_equality: bool,
        derivations: dict[int, DerivationRecord] | None = None,
    ) -> list[SelectedLemma]:
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tFacts: {len(facts)}"
            f"\n\tSubgoal clauses: {len(subgoal_pool)}"
            f"\n\tPer filter: {self.quotas.per_filter}"
            f"\n\tEquality: {has_equality}\n"
        )
        quota = self.quotas.per_filter
        depth = DerivationDepth(derivations or {})
        chosen: dict[int, SelectedLemma] = {}

        def take(c: LemmaCandidate, name: str, value: float):
            if c.fact.id not in chosen:
                chosen[c.fact.id] = SelectedLemma(c, name, value, depth(c.fact.id))

        by_stat = sorted(facts, key=lambda c: (-psi_s(c), str(c.fact)))
        for c in by_stat[:quota]:
            take(c, FILTER_STATISTIC, psi_s(c))

        if has_equality:
            by_depth = sorted(facts, key=lambda c: (-depth(c.fact.id), str(c.fact)))
            for c in by_depth[:quota]:
                take(c, FILTER_DERIVATION, depth(c.fact.id))

        picked: set[int] = set()
        for sg in subgoal_pool:
            if len(picked) >= quota:
                break
            scored = [
                (psi_c(c, sg, self.quotas), c) for c in facts if _applicable(c, sg)
            ]
            if not scored:
                continue
            value, best = min(scored, key=lambda p: (-p[0], str(p[1].fact)))
            if best.fact.id in picked:
                continue
            picked.add(best.fact.id)
            take(best, FILTER_CONTEXT, value)

        selected = list(chosen.values())
        self.logger.info(f"Selected {len(selected)} of {len(facts)} facts as lemmas")
        return selected


def select_lemmas(
    facts: list[LemmaCandidate],
    subgoal_pool: list[Clause],
    quotas: FilterQuotas = FilterQuotas(),
    has_equality: bool = False,
    derivations: dict[int, DerivationRecord] | None = None,
    logger: Logger | None = None,
) -> list[SelectedLemma]:
    return LemmaSelector(quotas, logger).select(
        facts, subgoal_pool, has_equality, derivations
    )

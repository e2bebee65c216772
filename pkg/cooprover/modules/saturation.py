"""
Given-clause saturation prover.

Expansion rules are resolution, factoring, superposition, equality
resolution and equality factoring; contraction is tautology deletion,
forward/backward subsumption and (with a precedence ordering) rewriting
by oriented unit equations. Every clause carries a DerivationRecord with
its premises and the expansion/contraction participation counters used by
the lemma filters.
"""

import heapq
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from itertools import count
from logging import Logger
from typing import Callable

from cooprover.modules.kernel import (
    EQUALITY,
    App,
    Clause,
    Literal,
    Term,
    Var,
    apply,
    is_tautology,
    match,
    measures,
    rename_apart,
    replace_at,
    subsumes,
    subterms,
    term_vars,
    unify,
    variant_equal,
)
from cooprover.modules.problem_io import Problem

REFUTATION = "refutation"
SATURATED = "saturated"
LIMIT = "limit"


class Rule(str, Enum):
    INPUT = "input"
    RESOLUTION = "resolution"
    FACTORING = "factoring"
    SUPERPOSITION = "superposition"
    EQUALITY_RESOLUTION = "equality_resolution"
    EQUALITY_FACTORING = "equality_factoring"
    REWRITING = "rewriting"


class Calculus(str, Enum):
    RESOLUTION = "resolution"
    SUPERPOSITION = "superposition"


class OrderingMode(str, Enum):
    NONE = "none"
    PRECEDENCE = "precedence"


class TermOrdering(object):
    """
    Lexicographic path ordering over a symbol precedence. With mode none
    nothing is comparable and every literal counts as maximal.
    """

    def __init__(
        self,
        mode: OrderingMode = OrderingMode.NONE,
        precedence: dict[str, int] | None = None,
    ):
        self.mode = OrderingMode(mode)
        self.precedence = precedence or {}

    @classmethod
    def from_problem(cls, problem: Problem, mode: OrderingMode) -> "TermOrdering":
        # symbols appearing earlier in the input are greater
        order: list[str] = []

        def visit(t: Term):
            if isinstance(t, App):
                if t.symbol not in order:
                    order.append(t.symbol)
                for a in t.args:
                    visit(a)

        for clause in problem.clauses:
            for lit in clause:
                if lit.predicate != EQUALITY and lit.predicate not in order:
                    order.append(lit.predicate)
                for a in lit.args:
                    visit(a)
        precedence = {sym: len(order) - idx for idx, sym in enumerate(order)}
        precedence[EQUALITY] = 0
        return cls(mode, precedence)

    @property
    def active(self) -> bool:
        return self.mode == OrderingMode.PRECEDENCE

    def _rank(self, symbol: str) -> tuple:
        return (self.precedence.get(symbol, -1), symbol)

    def greater(self, s: Term, t: Term) -> bool:
        if not self.active or isinstance(s, Var):
            return False
        if isinstance(t, Var):
            return t.name in set(term_vars(s))
        if any(a == t or self.greater(a, t) for a in s.args):
            return True
        rs, rt = self._rank(s.symbol), self._rank(t.symbol)
        if rs > rt:
            return all(self.greater(s, b) for b in t.args)
        if s.symbol == t.symbol:
            for a, b in zip(s.args, t.args):
                if a != b:
                    return self.greater(a, b) and all(
                        self.greater(s, c) for c in t.args
                    )
        return False

    def literal_greater(self, first: Literal, second: Literal) -> bool:
        return self.greater(first.atom, second.atom)

    def maximal(self, lit: Literal, literals) -> bool:
        if not self.active:
            return True
        return not any(
            other != lit and self.literal_greater(other, lit) for other in literals
        )

    def orientations(self, s: Term, t: Term):
        """Admissible (from, to) orientations of an equation s = t."""
        if not self.active:
            return [(s, t), (t, s)]
        pairs = []
        if not self.greater(t, s):
            pairs.append((s, t))
        if not self.greater(s, t):
            pairs.append((t, s))
        return pairs


NO_ORDERING = TermOrdering()


# ------------------------------------------------------------ inference rules


def _without(literals: tuple, *indices: int) -> tuple:
    return tuple(lit for idx, lit in enumerate(literals) if idx not in indices)


def _apart(c: Clause, d: Clause, counter: count | None) -> Clause:
    return rename_apart(d, c.variables, counter)


def resolve(
    c: Clause,
    d: Clause,
    ordering: TermOrdering = NO_ORDERING,
    skip_equality: bool = False,
    counter: count | None = None,
) -> list[Clause]:
    """Binary resolvents of c and a renamed-apart d."""
    d = _apart(c, d, counter)
    results = []
    for i, lit in enumerate(c.literals):
        if skip_equality and lit.is_equality:
            continue
        for j, other in enumerate(d.literals):
            if lit.positive == other.positive or lit.predicate != other.predicate:
                continue
            sigma = unify(lit, other)
            if sigma is None:
                continue
            if ordering.active and not (
                ordering.maximal(apply(sigma, lit), apply(sigma, c).literals)
                and ordering.maximal(apply(sigma, other), apply(sigma, d).literals)
            ):
                continue
            results.append(
                apply(
                    sigma,
                    Clause(_without(c.literals, i) + _without(d.literals, j)),
                )
            )
    return list(dict.fromkeys(results))


def factor(
    c: Clause,
    calculus: Calculus = Calculus.SUPERPOSITION,
    ordering: TermOrdering = NO_ORDERING,
) -> list[Clause]:
    """
    Binary factors. Under the superposition calculus only positive
    literals are factored.
    """
    results = []
    for i, lit in enumerate(c.literals):
        if calculus == Calculus.SUPERPOSITION and not lit.positive:
            continue
        for j in range(i + 1, len(c.literals)):
            other = c.literals[j]
            if other.positive != lit.positive or other.predicate != lit.predicate:
                continue
            sigma = unify(lit, other)
            if sigma is None:
                continue
            result = apply(sigma, c)
            if ordering.active and not ordering.maximal(
                apply(sigma, lit), result.literals
            ):
                continue
            results.append(result)
    return list(dict.fromkeys(results))


def superpose(
    c: Clause,
    d: Clause,
    ordering: TermOrdering = NO_ORDERING,
    counter: count | None = None,
) -> list[Clause]:
    """
    Superposition from the positive equations of c into non-variable
    subterms of a renamed-apart d.
    """
    d = _apart(c, d, counter)
    results = []
    for i, eq in enumerate(c.literals):
        if not (eq.is_equality and eq.positive):
            continue
        for s, t in ordering.orientations(*eq.args):
            if isinstance(s, Var):
                continue
            for j, lit in enumerate(d.literals):
                for side, arg in enumerate(lit.args):
                    for path, u in subterms(arg):
                        sigma = unify(s, u)
                        if sigma is None:
                            continue
                        if ordering.active and not _ordered_superposition(
                            ordering, sigma, c, eq, s, t, d, lit, side
                        ):
                            continue
                        args = list(lit.args)
                        args[side] = replace_at(arg, path, t)
                        rewritten = Literal(lit.positive, lit.predicate, tuple(args))
                        results.append(
                            apply(
                                sigma,
                                Clause(
                                    _without(c.literals, i)
                                    + _without(d.literals, j)
                                    + (rewritten,)
                                ),
                            )
                        )
    return list(dict.fromkeys(results))


def _ordered_superposition(ordering, sigma, c, eq, s, t, d, lit, side) -> bool:
    if ordering.greater(apply(sigma, t), apply(sigma, s)):
        return False
    if lit.is_equality:
        this, other = lit.args[side], lit.args[1 - side]
        if ordering.greater(apply(sigma, other), apply(sigma, this)):
            return False
    return ordering.maximal(
        apply(sigma, eq), apply(sigma, c).literals
    ) and ordering.maximal(apply(sigma, lit), apply(sigma, d).literals)


def equality_resolve(
    c: Clause, ordering: TermOrdering = NO_ORDERING
) -> list[Clause]:
    results = []
    for i, lit in enumerate(c.literals):
        if not lit.is_equality or lit.positive:
            continue
        sigma = unify(*lit.args)
        if sigma is None:
            continue
        if ordering.active and not ordering.maximal(
            apply(sigma, lit), apply(sigma, c).literals
        ):
            continue
        results.append(apply(sigma, Clause(_without(c.literals, i))))
    return list(dict.fromkeys(results))


def equality_factor(
    c: Clause, ordering: TermOrdering = NO_ORDERING
) -> list[Clause]:
    """
    From C' | s = t | s' = t' with σ = mgu(s, s') derive σ(C' | t != t' | s' = t').
    Every ordered pair of positive equations is tried in both orientations.
    """
    results = []
    lits = c.literals
    positive = [i for i, lit in enumerate(lits) if lit.is_equality and lit.positive]
    for i in positive:
        for s, t in ordering.orientations(*lits[i].args):
            for j in positive:
                if j == i:
                    continue
                for s2, t2 in NO_ORDERING.orientations(*lits[j].args):
                    sigma = unify(s, s2)
                    if sigma is None:
                        continue
                    if ordering.active and ordering.greater(
                        apply(sigma, t), apply(sigma, s)
                    ):
                        continue
                    rest = _without(lits, i, j)
                    results.append(
                        apply(
                            sigma,
                            Clause(rest + (Literal(False, EQUALITY, (t, t2)), lits[j])),
                        )
                    )
    return list(dict.fromkeys(results))


def rewrite_term(
    t: Term, rules: list[tuple[Term, Term]], ordering: TermOrdering
) -> tuple[Term, set[int]]:
    """Normal form of t; also returns the indices of rules used."""
    used: set[int] = set()
    changed = True
    while changed:
        changed = False
        for path, u in list(subterms(t)):
            for idx, (lhs, rhs) in enumerate(rules):
                sigma = match(lhs, u)
                if sigma is None:
                    continue
                target = apply(sigma, rhs)
                if not ordering.greater(u, target):
                    continue
                t = replace_at(t, path, target)
                used.add(idx)
                changed = True
                break
            if changed:
                break
    return t, used


# ----------------------------------------------------------------- heuristics


class Heuristic(object):
    """
    Clause selection: smallest weight first, and every `fifo_period`-th
    activation the oldest passive clause. A period of 0 disables the
    breadth-first picks.
    """

    name = "symbols"

    def __init__(self, fifo_period: int = 5):
        if fifo_period < 0:
            raise ValueError("fifo_period must be nonnegative")
        self.fifo_period = fifo_period

    def weight(self, clause: Clause, record=None, state=None) -> float:
        return measures(clause).symbol_count

    def __repr__(self) -> str:
        return f"{self.name}(fifo_period={self.fifo_period})"


class FifoHeuristic(Heuristic):
    name = "fifo"

    def __init__(self):
        super().__init__(fifo_period=0)

    def weight(self, clause, record=None, state=None) -> float:
        return state.seq_of(clause.id) if state is not None else 0


class RecentResolventHeuristic(Heuristic):
    """
    FIFO, except that clauses generated from the two most recently
    activated clauses are taken first.
    """

    name = "recent"

    def __init__(self):
        super().__init__(fifo_period=0)

    def weight(self, clause, record=None, state=None) -> float:
        if state is None:
            return 0
        if (
            record is not None
            and record.rule != Rule.INPUT
            and len(state.recent) == 2
            and set(record.premises) == set(state.recent)
        ):
            return 0
        return 1 + state.seq_of(clause.id)


class SplitWeightHeuristic(Heuristic):
    """
    Symbol count per literal, with literals of the `heavy` predicate
    costing an extra 2 + i. Every other literal weighs its symbol count.
    """

    def __init__(self, i: int, heavy: str = "q"):
        super().__init__(fifo_period=0)
        self.i = i
        self.heavy = heavy
        self.name = f"hi:{i}" if heavy == "q" else f"hi:{i}:{heavy}"

    def weight(self, clause, record=None, state=None) -> float:
        total = 0
        for lit in clause:
            size = measures(lit).symbol_count
            total += size + (2 + self.i if lit.predicate == self.heavy else 0)
        return total


def make_heuristic(name: str = "symbols", fifo_period: int = 5) -> Heuristic:
    if name == "symbols":
        return Heuristic(fifo_period)
    if name == "fifo":
        return FifoHeuristic()
    if name == "recent":
        return RecentResolventHeuristic()
    if name.startswith("hi:"):
        # hi:<i> or hi:<i>:<heavy predicate>
        parts = name.split(":")
        if len(parts) > 3 or not parts[1].isdigit() or not all(parts[2:]):
            raise ValueError(f"unknown heuristic '{name}'")
        return SplitWeightHeuristic(int(parts[1]), *parts[2:])
    raise ValueError(f"unknown heuristic '{name}'")


# ---------------------------------------------------------------------- state


@dataclass
class DerivationRecord:
    rule: Rule
    premises: tuple = ()
    epsilon: int = 0
    kappa: int = 0


@dataclass(frozen=True)
class DerivationStep:
    id: int
    rule: str
    premises: tuple
    clause: Clause

    def __str__(self) -> str:
        premises = ",".join(str(p) for p in self.premises)
        return f"[{self.id}, {self.rule}({premises})] {self.clause}"


@dataclass(frozen=True)
class SaturationResult:
    status: str
    activations: int
    inferences: int
    derivation: tuple = ()

    @property
    def proof_length(self) -> int:
        return sum(1 for step in self.derivation if step.rule != Rule.INPUT.value)


@dataclass
class ActivationReport:
    given: Clause | None = None
    kept: bool = False
    generated: int = 0
    removed: list = field(default_factory=list)
    refutation: bool = False
    saturated: bool = False


class ProverState(object):
    """Active set F^A, passive set F^P and the derivation records."""

    def __init__(self):
        self.active: dict[int, Clause] = {}
        self.passive: dict[int, Clause] = {}
        self.clauses: dict[int, Clause] = {}
        self.derivations: dict[int, DerivationRecord] = {}
        self.activation_counter = 0
        self.inferences = 0
        self.trace: list[Clause] = []
        self.recent: tuple = ()
        self._heap: list = []
        self._fifo: list = []
        self._seqs: dict[int, int] = {}
        self._seq = count()
        self._ids = count(1)
        self._empty: list[int] = []

    def new_id(self) -> int:
        return next(self._ids)

    def seq_of(self, clause_id: int) -> int:
        return self._seqs.get(clause_id, 0)

    def register(self, clause: Clause, record: DerivationRecord) -> Clause:
        clause = clause.with_id(self.new_id())
        self.clauses[clause.id] = clause
        self.derivations[clause.id] = record
        self._seqs[clause.id] = next(self._seq)
        return clause

    def push_passive(self, clause: Clause, weight: float) -> None:
        self.passive[clause.id] = clause
        seq = self._seqs[clause.id]
        heapq.heappush(self._heap, (weight, seq, clause.id))
        heapq.heappush(self._fifo, (seq, clause.id))
        if clause.is_empty:
            self._empty.append(clause.id)

    def pop_passive(self, fifo: bool) -> Clause | None:
        while self._empty:
            cid = self._empty.pop(0)
            if cid in self.passive:
                return self.passive.pop(cid)
        queue = self._fifo if fifo else self._heap
        while queue:
            cid = heapq.heappop(queue)[-1]
            if cid in self.passive:
                return self.passive.pop(cid)
        return None

    def ancestors(self, clause_id: int) -> list[int]:
        seen: set[int] = set()
        stack = [clause_id]
        while stack:
            cid = stack.pop()
            if cid in seen:
                continue
            seen.add(cid)
            stack.extend(self.derivations[cid].premises)
        return sorted(seen)

    def derivation(self, clause_id: int) -> tuple:
        return tuple(
            DerivationStep(
                cid,
                self.derivations[cid].rule.value,
                self.derivations[cid].premises,
                self.clauses[cid],
            )
            for cid in self.ancestors(clause_id)
        )


class _Kept:
    def __init__(self, clause: Clause):
        self.clause = clause


class _Deleted:
    def __init__(self, reason: str):
        self.reason = reason


class SaturationProver(object):
    """
    Owns one ProverState. The stop callback is polled between activations.
    """

    def __init__(
        self,
        problem: Problem,
        heuristic: Heuristic | None = None,
        ordering: OrderingMode | TermOrdering = OrderingMode.NONE,
        calculus: Calculus = Calculus.SUPERPOSITION,
        logger: Logger | None = None,
        verbose: bool = False,
    ):
        self.problem = problem
        self.heuristic = heuristic or Heuristic()
        self.ordering = (
            ordering
            if isinstance(ordering, TermOrdering)
            else TermOrdering.from_problem(problem, ordering)
        )
        self.calculus = Calculus(calculus)
        self.logger = logger or logging.getLogger("cooprover")
        self.verbose = verbose
        self.counter = count(1)
        self.state = ProverState()
        self.input_ids: dict[int, int] = {}
        for clause in problem.clauses:
            registered = self.state.register(
                clause, DerivationRecord(Rule.INPUT)
            )
            self.input_ids[registered.id] = clause.id
            self._insert(registered)

    # ------------------------------------------------------------ contraction

    def _insert(self, clause: Clause) -> None:
        record = self.state.derivations[clause.id]
        weight = self.heuristic.weight(clause, record, self.state)
        self.state.push_passive(clause, weight)

    def _demodulators(self, exclude: int = -1) -> list[tuple[int, Term, Term]]:
        if not self.ordering.active:
            return []
        rules = []
        for cid, clause in self.state.active.items():
            if cid == exclude or not clause.is_unit:
                continue
            lit = clause.literals[0]
            if not (lit.is_equality and lit.positive):
                continue
            s, t = lit.args
            if self.ordering.greater(s, t):
                rules.append((cid, s, t))
            elif self.ordering.greater(t, s):
                rules.append((cid, t, s))
        return rules

    def _rewrite(self, clause: Clause, demodulators) -> tuple[Clause, set[int]]:
        if not demodulators:
            return clause, set()
        rules = [(lhs, rhs) for _, lhs, rhs in demodulators]
        used: set[int] = set()
        literals = []
        for lit in clause:
            args = []
            for a in lit.args:
                normal, hits = rewrite_term(a, rules, self.ordering)
                used |= hits
                args.append(normal)
            literals.append(Literal(lit.positive, lit.predicate, tuple(args)))
        return Clause(tuple(literals)), {demodulators[i][0] for i in used}

    def contract(self, clause: Clause, exclude: int = -1):
        """
        Forward contraction against the active set. Returns _Kept with the
        (possibly rewritten and re-registered) clause or _Deleted.
        """
        if is_tautology(clause):
            return _Deleted("tautology")
        rewritten, used = self._rewrite(clause, self._demodulators(exclude))
        if used:
            for cid in used:
                self.state.derivations[cid].kappa += 1
            rewritten = self.state.register(
                rewritten,
                DerivationRecord(Rule.REWRITING, (clause.id, *sorted(used))),
            )
            if is_tautology(rewritten):
                return _Deleted("tautology")
            clause = rewritten
        for cid, active in self.state.active.items():
            if cid != exclude and subsumes(active, clause):
                self.state.derivations[cid].kappa += 1
                return _Deleted("subsumed")
        return _Kept(clause)

    def back_contract(self, clause: Clause) -> list[int]:
        """Remove or rewrite clauses made redundant by a new active clause."""
        removed = []
        record = self.state.derivations[clause.id]
        for pool in (self.state.active, self.state.passive):
            for cid in list(pool):
                if cid == clause.id:
                    continue
                if subsumes(clause, pool[cid]):
                    del pool[cid]
                    record.kappa += 1
                    removed.append(cid)
        rules = [r for r in self._demodulators() if r[0] == clause.id]
        if rules:
            for pool in (self.state.active, self.state.passive):
                for cid in list(pool):
                    if cid == clause.id:
                        continue
                    target = pool[cid]
                    rewritten, used = self._rewrite(target, rules)
                    if not used:
                        continue
                    del pool[cid]
                    record.kappa += 1
                    removed.append(cid)
                    fresh = self.state.register(
                        rewritten,
                        DerivationRecord(Rule.REWRITING, (cid, clause.id)),
                    )
                    result = self.contract(fresh)
                    if isinstance(result, _Kept):
                        self._insert(result.clause)
        return removed

    # -------------------------------------------------------------- expansion

    def _expansions(self, given: Clause):
        skip_eq = self.calculus == Calculus.SUPERPOSITION
        ordering = self.ordering
        for cid in sorted(self.state.active):
            other = self.state.active[cid]
            premises = (given.id,) if cid == given.id else (given.id, cid)
            for result in resolve(given, other, ordering, skip_eq, self.counter):
                yield Rule.RESOLUTION, premises, result
            if self.calculus != Calculus.SUPERPOSITION:
                continue
            for result in superpose(given, other, ordering, self.counter):
                yield Rule.SUPERPOSITION, premises, result
            if cid != given.id:
                for result in superpose(other, given, ordering, self.counter):
                    yield Rule.SUPERPOSITION, (cid, given.id), result
        for result in factor(given, self.calculus, ordering):
            yield Rule.FACTORING, (given.id,), result
        if self.calculus == Calculus.SUPERPOSITION:
            for result in equality_resolve(given, ordering):
                yield Rule.EQUALITY_RESOLUTION, (given.id,), result
            for result in equality_factor(given, ordering):
                yield Rule.EQUALITY_FACTORING, (given.id,), result

    def activate(self) -> ActivationReport:
        state = self.state
        period = self.heuristic.fifo_period
        fifo = bool(period) and (state.activation_counter + 1) % period == 0
        given = state.pop_passive(fifo)
        if given is None:
            return ActivationReport(saturated=True)
        state.activation_counter += 1
        result = self.contract(given)
        if isinstance(result, _Deleted):
            self.logger.debug(f"Dropped {given} ({result.reason})")
            return ActivationReport(given=given)
        given = result.clause
        state.active[given.id] = given
        state.trace.append(given)
        state.recent = (state.recent[-1:] + (given.id,))[-2:]
        self.logger.debug(f"Activated [{given.id}] {given}")
        if given.is_empty:
            return ActivationReport(given=given, kept=True, refutation=True)
        removed = self.back_contract(given)
        generated = 0
        for rule, premises, clause in list(self._expansions(given)):
            state.inferences += 1
            for pid in set(premises):
                state.derivations[pid].epsilon += 1
            registered = state.register(clause, DerivationRecord(rule, premises))
            kept = self.contract(registered)
            if isinstance(kept, _Kept):
                self._insert(kept.clause)
                generated += 1
        return ActivationReport(given, True, generated, removed)

    def saturate(
        self,
        max_activations: int | None = None,
        deadline: float | None = None,
        stop: Callable[[], bool] | None = None,
    ) -> SaturationResult:
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tProblem: {self.problem.name}"
            f"\n\tClauses: {len(self.problem.clauses)}"
            f"\n\tHeuristic: {self.heuristic!r}"
            f"\n\tOrdering: {self.ordering.mode.value}"
            f"\n\tCalculus: {self.calculus.value}"
            f"\n\tMax activations: {max_activations}\n"
        )
        state = self.state
        while True:
            if max_activations is not None and state.activation_counter >= max_activations:
                break
            if deadline is not None and time.monotonic() > deadline:
                break
            if stop is not None and stop():
                self.logger.info("Stop requested")
                break
            report = self.activate()
            if report.refutation:
                derivation = state.derivation(report.given.id)
                self.logger.info(
                    f"Refutation after {state.activation_counter} activations"
                )
                return SaturationResult(
                    REFUTATION, state.activation_counter, state.inferences, derivation
                )
            if report.saturated:
                self.logger.info("Clause set saturated")
                return SaturationResult(
                    SATURATED, state.activation_counter, state.inferences
                )
        return SaturationResult(LIMIT, state.activation_counter, state.inferences)

    def preprocess(self, i: int, stop: Callable[[], bool] | None = None) -> list[Clause]:
        """Run up to i activations and return the active positive units."""
        if i < 0:
            raise ValueError("activation count must be nonnegative")
        while self.state.activation_counter < i:
            if stop is not None and stop():
                break
            report = self.activate()
            if report.saturated or report.refutation:
                break
        return self.facts()

    def facts(self) -> list[Clause]:
        return [c for c in self.state.active.values() if c.is_fact]


def saturate(
    problem: Problem,
    heuristic: Heuristic | None = None,
    ordering: OrderingMode = OrderingMode.NONE,
    max_activations: int | None = None,
    deadline: float | None = None,
    calculus: Calculus = Calculus.SUPERPOSITION,
    logger: Logger | None = None,
) -> SaturationResult:
    prover = SaturationProver(problem, heuristic, ordering, calculus, logger)
    return prover.saturate(max_activations, deadline)


def preprocess(
    problem: Problem,
    i: int,
    heuristic: Heuristic | None = None,
    ordering: OrderingMode = OrderingMode.NONE,
    logger: Logger | None = None,
) -> tuple[list[Clause], ProverState]:
    prover = SaturationProver(problem, heuristic, ordering, logger=logger)
    facts = prover.preprocess(i)
    return facts, prover.state


def _rederive(step: DerivationStep, premises: list[Clause], calculus, ordering) -> list[Clause]:
    rule = Rule(step.rule)
    skip_eq = calculus == Calculus.SUPERPOSITION
    if rule == Rule.RESOLUTION:
        first, second = premises[0], premises[-1]
        return resolve(first, second, ordering, skip_eq)
    if rule == Rule.SUPERPOSITION:
        first, second = premises[0], premises[-1]
        return superpose(first, second, ordering)
    if rule == Rule.FACTORING:
        return factor(premises[0], calculus, ordering)
    if rule == Rule.EQUALITY_RESOLUTION:
        return equality_resolve(premises[0], ordering)
    if rule == Rule.EQUALITY_FACTORING:
        return equality_factor(premises[0], ordering)
    if rule == Rule.REWRITING:
        rules = []
        for unit in premises[1:]:
            s, t = unit.literals[0].args
            rules.append((s, t) if ordering.greater(s, t) else (t, s))
        literals = []
        for lit in premises[0]:
            literals.append(
                Literal(
                    lit.positive,
                    lit.predicate,
                    tuple(rewrite_term(a, rules, ordering)[0] for a in lit.args),
                )
            )
        return [Clause(tuple(literals))]
    return []


def check_derivation(
    problem: Problem,
    result: SaturationResult,
    calculus: Calculus = Calculus.SUPERPOSITION,
    ordering: OrderingMode = OrderingMode.NONE,
) -> bool:
    """Re-derive every step of a refutation and check it ends in □."""
    if result.status != REFUTATION or not result.derivation:
        return False
    term_ordering = TermOrdering.from_problem(problem, ordering)
    by_id = {step.id: step.clause for step in result.derivation}
    for step in result.derivation:
        if step.rule == Rule.INPUT.value:
            if not any(variant_equal(step.clause, c) for c in problem.clauses):
                return False
            continue
        premises = [by_id[p] for p in step.premises]
        candidates = _rederive(step, premises, calculus, term_ordering)
        if not any(variant_equal(step.clause, c) for c in candidates):
            return False
    return result.derivation[-1].clause.is_empty

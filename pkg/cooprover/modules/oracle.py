"""
Desk-scale oracles: exact minimal refutation length by iterative
deepening over inference sequences, and propositional satisfiability
and entailment for ground clause sets.
"""

from itertools import count
from typing import Iterable

from pysat.formula import IDPool
from pysat.solvers import Solver

from cooprover.modules.kernel import (
    Clause,
    Literal,
    OracleBudgetExceeded,
    VariantIndex,
    is_tautology,
    normalize_variables,
)
from cooprover.modules.problem_io import Problem
from cooprover.modules.saturation import (
    Calculus,
    OrderingMode,
    Rule,
    TermOrdering,
    equality_factor,
    equality_resolve,
    factor,
    resolve,
    superpose,
)

SOLVER_NAME = "m22"


# ----------------------------------------------------------- propositional


def _is_ground(clauses: Iterable[Clause]) -> bool:
    return all(not c.variables for c in clauses)


def _atom_key(lit: Literal) -> str:
    if lit.is_equality:
        # orientation-free, so s = t and t = s share a variable
        return "=" + "|".join(sorted(str(a) for a in lit.args))
    return str(lit.atom)


def _encode(clauses: Iterable[Clause], pool: IDPool) -> list[list[int]]:
    encoded = []
    for clause in clauses:
        encoded.append(
            [
                pool.id(_atom_key(lit)) * (1 if lit.positive else -1)
                for lit in clause
            ]
        )
    return encoded


def _check_ground(clauses: list[Clause]) -> None:
    if not _is_ground(clauses):
        raise ValueError("propositional oracle needs ground clauses")


def is_satisfiable(clauses: Iterable[Clause]) -> bool:
    """
    Propositional satisfiability of a ground clause set. Equality atoms
    are uninterpreted apart from symmetry.
    """
    clauses = list(clauses)
    _check_ground(clauses)
    if any(c.is_empty for c in clauses):
        return False
    pool = IDPool()
    with Solver(name=SOLVER_NAME, bootstrap_with=_encode(clauses, pool)) as solver:
        return solver.solve()


def entails(clauses: Iterable[Clause], clause: Clause) -> bool:
    """Whether the ground set propositionally entails the ground clause."""
    clauses = list(clauses)
    _check_ground(clauses + [clause])
    if is_tautology(clause):
        return True
    if any(c.is_empty for c in clauses):
        return True
    pool = IDPool()
    encoded = _encode(clauses, pool)
    assumptions = [-lit for lit in _encode([clause], pool)[0]]
    with Solver(name=SOLVER_NAME, bootstrap_with=encoded) as solver:
        return not solver.solve(assumptions=assumptions)


# ------------------------------------------------------- proof length search


class _GroundBackend(object):
    """Ground resolution on integer clauses; factoring is implicit."""

    def __init__(self, clauses: list[Clause]):
        self.pool = IDPool()
        self.cache: dict = {}

    def convert(self, clauses: list[Clause]) -> list[frozenset]:
        return [frozenset(lits) for lits in _encode(clauses, self.pool)]

    @staticmethod
    def is_empty(clause: frozenset) -> bool:
        return not clause

    @staticmethod
    def size(clause: frozenset) -> int:
        return len(clause)

    @staticmethod
    def text(clause: frozenset) -> str:
        return " ".join(str(x) for x in sorted(clause))

    def pair(self, c: frozenset, d: frozenset) -> list:
        key = (c, d)
        hit = self.cache.get(key)
        if hit is None:
            hit = []
            for lit in c:
                if -lit in d:
                    resolvent = (c - {lit}) | (d - {-lit})
                    if not any(-x in resolvent for x in resolvent):
                        hit.append((Rule.RESOLUTION.value, resolvent))
            self.cache[key] = hit
        return hit

    @staticmethod
    def single(c: frozenset) -> list:
        return []

    def index(self, clauses: list):
        return _SetIndex(clauses)


class _SetIndex(object):
    def __init__(self, clauses):
        self.items = set(clauses)

    def __contains__(self, clause) -> bool:
        return clause in self.items

    def add(self, clause) -> None:
        self.items.add(clause)

    def remove(self, clause) -> None:
        self.items.discard(clause)


class _FirstOrderBackend(object):
    def __init__(self, problem: Problem, calculus: Calculus, ordering: TermOrdering):
        self.calculus = calculus
        self.ordering = ordering
        self.counter = count(1)
        self.cache: dict = {}

    @staticmethod
    def convert(clauses: list[Clause]) -> list[Clause]:
        return [normalize_variables(c) for c in clauses]

    @staticmethod
    def is_empty(clause: Clause) -> bool:
        return clause.is_empty

    @staticmethod
    def size(clause: Clause) -> int:
        return len(clause)

    @staticmethod
    def text(clause: Clause) -> str:
        return str(clause)

    def _finish(self, rule: Rule, results: list[Clause]) -> list:
        return [
            (rule.value, normalize_variables(r))
            for r in results
            if not is_tautology(r)
        ]

    def pair(self, c: Clause, d: Clause) -> list:
        key = (c, d)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        sup = self.calculus == Calculus.SUPERPOSITION
        hit = self._finish(
            Rule.RESOLUTION, resolve(c, d, self.ordering, sup, self.counter)
        )
        if sup:
            hit += self._finish(
                Rule.SUPERPOSITION, superpose(c, d, self.ordering, self.counter)
            )
        self.cache[key] = hit
        return hit

    def single(self, c: Clause) -> list:
        key = (c,)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        hit = self._finish(Rule.FACTORING, factor(c, self.calculus, self.ordering))
        if self.calculus == Calculus.SUPERPOSITION:
            hit += self._finish(
                Rule.EQUALITY_RESOLUTION, equality_resolve(c, self.ordering)
            )
            hit += self._finish(
                Rule.EQUALITY_FACTORING, equality_factor(c, self.ordering)
            )
        self.cache[key] = hit
        return hit

    @staticmethod
    def index(clauses: list):
        return VariantIndex(clauses)


class ProofLengthSearch(object):
    """
    Iterative deepening over inference sequences. Pruning keeps the
    search exact:

    - inferences whose result is already present are skipped;
    - an inference that does not use the previous step's result must
      come after it in a fixed order, so independent steps are tried in
      one order only;
    - every derived clause other than the final □ must be used later,
      a step consumes at most one unused clause net and the final
      step at most two;
    - on ground input a step shortens the shortest clause by at most one.
    """

    def __init__(
        self,
        problem: Problem,
        calculus: Calculus = Calculus.RESOLUTION,
        ordering: OrderingMode = OrderingMode.NONE,
        budget: int | None = 2_000_000,
    ):
        self.problem = problem
        self.calculus = Calculus(calculus)
        self.budget = budget
        self.nodes = 0
        ground = _is_ground(problem.clauses)
        self.ground = ground
        if ground and self.calculus == Calculus.RESOLUTION:
            self.backend = _GroundBackend(list(problem.clauses))
        else:
            self.backend = _FirstOrderBackend(
                problem,
                self.calculus,
                TermOrdering.from_problem(problem, OrderingMode(ordering)),
            )
        self.inputs = self.backend.convert(list(problem.clauses))

    def _inferences(self, clauses: list):
        backend = self.backend
        n = len(clauses)
        for i in range(n):
            for rule, result in backend.single(clauses[i]):
                yield (i,), rule, result
            for j in range(n):
                if i == j and self.calculus == Calculus.RESOLUTION and self.ground:
                    continue
                if j < i and self.calculus == Calculus.RESOLUTION:
                    # resolution is symmetric up to renaming
                    continue
                for rule, result in backend.pair(clauses[i], clauses[j]):
                    yield (i, j), rule, result

    def _search(self, clauses, index, unused: set, remaining: int, last) -> bool:
        self.nodes += 1
        if self.budget is not None and self.nodes > self.budget:
            raise OracleBudgetExceeded(
                f"proof length search exceeded {self.budget} nodes"
            )
        if self.ground and min(self.backend.size(c) for c in clauses) > remaining:
            return False
        last_idx = len(clauses) - 1
        for premises, rule, result in self._inferences(clauses):
            is_empty = self.backend.is_empty(result)
            if remaining == 1 and not is_empty:
                continue
            if is_empty:
                return True
            if result in index:
                continue
            key = (
                tuple(sorted(self.backend.text(clauses[p]) for p in premises)),
                rule,
                self.backend.text(result),
            )
            if last is not None and last_idx not in premises and key <= last:
                continue
            consumed = unused.intersection(premises)
            after = unused - consumed
            after.add(len(clauses))
            # each later step removes at most one unused clause, the last two
            if len(after) > remaining:
                continue
            clauses.append(result)
            index.add(result)
            found = self._search(clauses, index, after, remaining - 1, key)
            index.remove(result)
            clauses.pop()
            if found:
                return True
        return False

    def run(self, max_length: int) -> int | None:
        if any(self.backend.is_empty(c) for c in self.inputs):
            return 0
        for length in range(1, max_length + 1):
            clauses = list(self.inputs)
            index = self.backend.index(clauses)
            if self._search(clauses, index, set(), length, None):
                return length
        return None


def min_proof_length(
    problem: Problem,
    calculus: Calculus = Calculus.RESOLUTION,
    ordering: OrderingMode = OrderingMode.NONE,
    max_length: int = 12,
    budget: int | None = 2_000_000,
) -> int | None:
    """
    Exact number of inference steps of a shortest refutation, or None
    when none has at most max_length steps. Raises OracleBudgetExceeded
    when the search visits more than `budget` nodes.
    """
    return ProofLengthSearch(problem, calculus, ordering, budget).run(max_length)

"""
Connection tableau (model elimination) engine.

`TableauProver` runs consecutively bounded iterative deepening over the
start, extension and reduction rules and enumerates subgoal clauses of
all tableaux inside a bounded segment of the search tree.
"""

import logging
import math
import time
from dataclasses import dataclass, replace
from enum import Enum
from itertools import count
from logging import Logger
from typing import Callable

from cooprover.modules.kernel import (
    Clause,
    Literal,
    VariantIndex,
    apply,
    fresh_renaming,
    normalize_variables,
    resolve_literal,
    skeleton_key,
    undo_to,
    unify_into,
    variant_equal,
)
from cooprover.modules.problem_io import Mode, Problem, goal_clauses

START = "start"
EXTENSION = "extension"
REDUCTION = "reduction"

CLOSED = "closed"
EXHAUSTED = "exhausted"
LIMIT = "limit"


class BoundKind(str, Enum):
    DEPTH = "depth"
    INFERENCE = "inference"
    WEIGHTED = "weighted"


@dataclass(frozen=True)
class Bound:
    kind: BoundKind = BoundKind.INFERENCE
    depth_factor: float = 0.5
    inference_factor: float = 2.0

    def __post_init__(self):
        if self.depth_factor <= 0 or self.inference_factor <= 0:
            raise ValueError("weighted bound factors must be positive")

    def caps(self, n: int) -> tuple[float, float]:
        """(depth cap, inference cap) for resource n."""
        if self.kind == BoundKind.DEPTH:
            return n, math.inf
        if self.kind == BoundKind.INFERENCE:
            return math.inf, n
        return (
            math.ceil(self.depth_factor * n),
            math.ceil(self.inference_factor * n),
        )


@dataclass(frozen=True)
class ProofStep:
    rule: str
    position: int  # index into the ordered open subgoals
    clause_id: int = -1
    literal_index: int = -1
    ancestor: int = -1  # node index for reductions


@dataclass(frozen=True)
class TableauProof:
    steps: tuple
    resource: int
    lines: tuple = ()

    @property
    def inferences(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class TableauResult:
    status: str
    resource: int
    proof: TableauProof | None = None
    attempts: int = 0


@dataclass(frozen=True)
class SubgoalClauseRecord:
    clause: Clause
    inference_count: int
    tableau_clauses: tuple = ()
    start_clause: int = 0


@dataclass
class Node:
    literal: Literal | None
    parent: int
    depth: int
    closed: bool = False
    inner: bool = False


@dataclass
class _Frame:
    open_leaves: tuple
    n_nodes: int
    trail_mark: int
    n_clauses: int
    touched: int
    max_inner_depth: int


class Tableau(object):
    """
    Mutable tableau with an undo trail. Node 0 is the unlabeled root;
    `open_leaves` lists open branch leaves left to right.
    """

    def __init__(self, counter: count | None = None):
        self.nodes: list[Node] = [Node(None, -1, 0)]
        self.bindings: dict = {}
        self.trail: list = []
        self.open_leaves: tuple = ()
        self.inference_count = 0
        self.start_clause: int | None = None
        self.tableau_clauses: list[tuple[int, tuple]] = []
        self.max_inner_depth = 0
        self.steps: list[ProofStep] = []
        self._history: list[_Frame] = []
        self._counter = counter if counter is not None else count(1)

    def copy(self) -> "Tableau":
        other = Tableau(self._counter)
        other.nodes = [replace(node) for node in self.nodes]
        other.bindings = dict(self.bindings)
        other.trail = list(self.trail)
        other.open_leaves = self.open_leaves
        other.inference_count = self.inference_count
        other.start_clause = self.start_clause
        other.tableau_clauses = list(self.tableau_clauses)
        other.max_inner_depth = self.max_inner_depth
        other.steps = list(self.steps)
        other._history = [replace(frame) for frame in self._history]
        return other

    @property
    def is_closed(self) -> bool:
        return self.inference_count > 0 and not self.open_leaves

    def literal_at(self, idx: int) -> Literal:
        return resolve_literal(self.nodes[idx].literal, self.bindings)

    def ancestors(self, idx: int):
        parent = self.nodes[idx].parent
        while parent > 0:
            yield parent
            parent = self.nodes[parent].parent

    def _save(self, touched: int = -1):
        self._history.append(
            _Frame(
                self.open_leaves,
                len(self.nodes),
                len(self.trail),
                len(self.tableau_clauses),
                touched,
                self.max_inner_depth,
            )
        )

    def _variant(self, clause: Clause) -> tuple:
        """Renamed literals in the clause's own order."""
        if not clause.variables:
            return clause.literals
        renaming = fresh_renaming(clause.variables, counter=self._counter)
        return tuple(apply(renaming, lit) for lit in clause.literals)

    def _attach(self, parent: int, variant: tuple, connected: int) -> list:
        depth = self.nodes[parent].depth + 1
        fresh = []
        for idx, lit in enumerate(variant):
            self.nodes.append(
                Node(lit, parent, depth, closed=idx == connected)
            )
            if idx != connected:
                fresh.append(len(self.nodes) - 1)
        return fresh

    def push_start(self, clause: Clause) -> bool:
        if self.inference_count:
            return False
        variant = self._variant(clause)
        self._save(0)
        self.nodes[0].inner = True
        self.open_leaves = tuple(self._attach(0, variant, -1))
        self.start_clause = clause.id
        self.tableau_clauses.append((clause.id, variant))
        self.steps.append(ProofStep(START, 0, clause.id))
        self.inference_count += 1
        return True

    def push_extension(self, position: int, clause: Clause, lit_idx: int) -> bool:
        leaf = self.open_leaves[position]
        subgoal = self.nodes[leaf].literal
        if clause.literals[lit_idx].positive == subgoal.positive:
            return False
        variant = self._variant(clause)
        partner = variant[lit_idx]
        mark = len(self.trail)
        if not unify_into(subgoal, partner, self.bindings, self.trail):
            undo_to(self.bindings, self.trail, mark)
            return False
        self._history.append(
            _Frame(
                self.open_leaves,
                len(self.nodes),
                mark,
                len(self.tableau_clauses),
                leaf,
                self.max_inner_depth,
            )
        )
        self.nodes[leaf].inner = True
        self.max_inner_depth = max(self.max_inner_depth, self.nodes[leaf].depth)
        fresh = self._attach(leaf, variant, lit_idx)
        self.open_leaves = (
            self.open_leaves[:position]
            + tuple(fresh)
            + self.open_leaves[position + 1 :]
        )
        self.tableau_clauses.append((clause.id, variant))
        self.steps.append(ProofStep(EXTENSION, position, clause.id, lit_idx))
        self.inference_count += 1
        return True

    def push_reduction(self, position: int, ancestor: int) -> bool:
        leaf = self.open_leaves[position]
        subgoal = self.nodes[leaf].literal
        target = self.nodes[ancestor].literal
        if target is None or target.positive == subgoal.positive:
            return False
        mark = len(self.trail)
        if not unify_into(subgoal, target, self.bindings, self.trail):
            undo_to(self.bindings, self.trail, mark)
            return False
        self._history.append(
            _Frame(
                self.open_leaves,
                len(self.nodes),
                mark,
                len(self.tableau_clauses),
                leaf,
                self.max_inner_depth,
            )
        )
        self.nodes[leaf].closed = True
        self.open_leaves = (
            self.open_leaves[:position] + self.open_leaves[position + 1 :]
        )
        self.steps.append(ProofStep(REDUCTION, position, ancestor=ancestor))
        self.inference_count += 1
        return True

    def undo(self) -> None:
        frame = self._history.pop()
        step = self.steps.pop()
        if step.rule == START:
            self.nodes[0].inner = False
            self.start_clause = None
        elif step.rule == EXTENSION:
            self.nodes[frame.touched].inner = False
        else:
            self.nodes[frame.touched].closed = False
        del self.nodes[frame.n_nodes :]
        undo_to(self.bindings, self.trail, frame.trail_mark)
        del self.tableau_clauses[frame.n_clauses :]
        self.open_leaves = frame.open_leaves
        self.max_inner_depth = frame.max_inner_depth
        self.inference_count -= 1

    def subgoal_clause(self) -> Clause:
        return Clause(tuple(self.literal_at(idx) for idx in self.open_leaves))

    def instantiated_clauses(self) -> tuple:
        return tuple(
            Clause(
                tuple(resolve_literal(lit, self.bindings) for lit in variant),
                id=clause_id,
            )
            for clause_id, variant in self.tableau_clauses
        )

    def is_regular(self) -> bool:
        """No literal occurs twice on a branch ending in an open leaf."""
        for leaf in self.open_leaves:
            lit = self.literal_at(leaf)
            for anc in self.ancestors(leaf):
                if self.literal_at(anc) == lit:
                    return False
        return True

    def is_connected(self) -> bool:
        for idx, node in enumerate(self.nodes):
            if idx == 0 or not node.inner:
                continue
            complement = self.literal_at(idx).complement()
            if not any(
                child.parent == idx
                and child.closed
                and resolve_literal(child.literal, self.bindings) == complement
                for child in self.nodes
            ):
                return False
        return True


def within_bound(tableau: Tableau, bound: Bound, n: int) -> bool:
    depth_cap, inference_cap = bound.caps(n)
    return (
        tableau.max_inner_depth <= depth_cap
        and tableau.inference_count <= inference_cap
    )


def expand_tableau(
    tableau: Tableau,
    rule: str,
    subgoal: int | None = None,
    arg=None,
    literal_index: int | None = None,
    horn: bool = False,
) -> Tableau | None:
    """
    Functional form of one inference. `subgoal` is a node index, `arg` a
    clause (start, extension) or an ancestor node index (reduction).
    Returns the expanded copy or None.
    """
    result = tableau.copy()
    if rule == START:
        return result if result.push_start(arg) else None
    if subgoal not in result.open_leaves:
        return None
    position = result.open_leaves.index(subgoal)
    if rule == EXTENSION:
        candidates = (
            [literal_index]
            if literal_index is not None
            else range(len(arg.literals))
        )
        for idx in candidates:
            if result.push_extension(position, arg, idx):
                return result
        return None
    if rule == REDUCTION and not horn:
        if arg not in tuple(result.ancestors(subgoal)):
            return None
        return result if result.push_reduction(position, arg) else None
    return None


class _Interrupted(Exception):
    pass


class _CapReached(Exception):
    pass


class TableauProver(object):
    """
    Proof search and subgoal clause enumeration over one problem.
    Searches are single threaded; use one instance per search context.
    """

    def __init__(
        self,
        problem: Problem,
        logger: Logger | None = None,
        verbose: bool = False,
        regularity: bool = True,
    ):
        self.problem = problem
        self.logger = logger or logging.getLogger("cooprover")
        self.verbose = verbose
        self.regularity = regularity
        self.horn = problem.is_horn
        self.by_id = {c.id: c for c in problem.clauses}
        self._connections: dict[tuple[str, bool], list] = {}
        for clause in problem.clauses:
            for idx, lit in enumerate(clause.literals):
                self._connections.setdefault(
                    (lit.predicate, lit.positive), []
                ).append((clause, idx))
        self.tableau = Tableau()
        self.attempts = 0
        self.bound_hit = False
        self.proof_found: TableauProof | None = None
        self._deadline: float | None = None
        self._stop: Callable[[], bool] | None = None
        self._max_attempts: int | None = None

    def connections(self, lit: Literal) -> list:
        return self._connections.get((lit.predicate, not lit.positive), [])

    def _tick(self):
        self.attempts += 1
        if self._max_attempts is not None and self.attempts > self._max_attempts:
            raise _Interrupted()
        if self.attempts % 64 == 0:
            if self._deadline is not None and time.monotonic() > self._deadline:
                raise _Interrupted()
            if self._stop is not None and self._stop():
                raise _Interrupted()

    # ------------------------------------------------------------- proving

    def _solve(self, bound: Bound, n: int) -> bool:
        self._tick()
        t = self.tableau
        if not t.open_leaves:
            return True
        _, inference_cap = bound.caps(n)
        # every open subgoal needs at least one more inference
        if t.inference_count + len(t.open_leaves) > inference_cap:
            self.bound_hit = True
            return False
        leaf = t.open_leaves[0]
        subgoal = t.nodes[leaf].literal
        for clause, idx in self.connections(subgoal):
            if not t.push_extension(0, clause, idx):
                continue
            if self._admissible(bound, n) and self._solve(bound, n):
                return True
            t.undo()
        if self.horn:
            return False
        for anc in tuple(t.ancestors(leaf)):
            if not t.push_reduction(0, anc):
                continue
            if self._admissible(bound, n) and self._solve(bound, n):
                return True
            t.undo()
        return False

    def _admissible(self, bound: Bound, n: int) -> bool:
        if not within_bound(self.tableau, bound, n):
            self.bound_hit = True
            return False
        return not self.regularity or self.tableau.is_regular()

    def _proof(self, n: int) -> TableauProof:
        t = self.tableau
        clauses = t.instantiated_clauses()
        lines = []
        used = iter(clauses)
        for number, step in enumerate(t.steps, start=1):
            if step.rule == REDUCTION:
                lines.append(
                    f"{number}. reduction of subgoal {step.position} "
                    f"with ancestor {t.literal_at(step.ancestor)}"
                )
                continue
            instance = normalize_variables(next(used))
            where = "" if step.rule == START else f" at subgoal {step.position}"
            lines.append(
                f"{number}. {step.rule}{where} with "
                f"[{step.clause_id}] {instance}"
            )
        return TableauProof(tuple(t.steps), n, tuple(lines))

    def start_clauses(self, mode: Mode) -> list[Clause]:
        starts = goal_clauses(self.problem, mode)
        if not starts:
            self.logger.warning(
                f"No start clauses for mode {Mode(mode).value} "
                f"in problem {self.problem.name}"
            )
        return starts

    def prove(
        self,
        mode: Mode = Mode.CTC_NEG,
        bound: Bound = Bound(),
        n0: int = 1,
        step: int = 1,
        max_resource: int | None = None,
        deadline: float | None = None,
        stop: Callable[[], bool] | None = None,
        max_attempts: int | None = None,
    ) -> TableauResult:
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tProblem: {self.problem.name}"
            f"\n\tClauses: {len(self.problem.clauses)}"
            f"\n\tMode: {Mode(mode).value}"
            f"\n\tBound: {bound.kind.value}"
            f"\n\tInitial resource: {n0}"
            f"\n\tStep: {step}"
            f"\n\tHorn: {self.horn}\n"
        )
        self._deadline, self._stop, self._max_attempts = (
            deadline,
            stop,
            max_attempts,
        )
        self.attempts = 0
        starts = self.start_clauses(mode)
        last = n0 - step
        n = n0
        try:
            while max_resource is None or n <= max_resource:
                self.logger.debug(f"Searching with resource {n}")
                self.bound_hit = False
                for clause in starts:
                    self.tableau = Tableau()
                    self.tableau.push_start(clause)
                    if self._admissible(bound, n) and self._solve(bound, n):
                        proof = self._proof(n)
                        self.logger.info(
                            f"Closed tableau with {proof.inferences} "
                            f"inferences at resource {n}"
                        )
                        return TableauResult(CLOSED, n, proof, self.attempts)
                if not self.bound_hit:
                    self.logger.info(f"Search space exhausted at resource {n}")
                    return TableauResult(EXHAUSTED, n, None, self.attempts)
                last = n
                n += step
        except _Interrupted:
            self.logger.info(f"Search interrupted after resource {last}")
        return TableauResult(LIMIT, max(last, 0), None, self.attempts)

    # ---------------------------------------------------------- enumeration

    def enumerate(
        self,
        k: int,
        mode: Mode = Mode.CTC_NEG,
        start_set: list[Clause] | None = None,
        cap: int | None = None,
        deadline: float | None = None,
        stop: Callable[[], bool] | None = None,
    ) -> list[SubgoalClauseRecord]:
        """
        Subgoal clauses of every tableau within k inferences (start counts
        as one). Inferences are applied at non-decreasing subgoal positions
        so every tableau of the segment is visited once.
        """
        self._deadline, self._stop, self._max_attempts = deadline, stop, None
        self.proof_found = None
        starts = list(start_set) if start_set is not None else self.start_clauses(mode)
        inputs = VariantIndex(self.problem.clauses)
        retained: list[SubgoalClauseRecord] = []
        buckets: dict = {}

        def record():
            t = self.tableau
            if not t.open_leaves:
                if self.proof_found is None:
                    self.proof_found = self._proof(k)
                return
            clause = normalize_variables(t.subgoal_clause())
            if clause in inputs:
                return
            entry = SubgoalClauseRecord(
                clause,
                t.inference_count,
                tuple(normalize_variables(c) for c in t.instantiated_clauses()),
                t.start_clause or 0,
            )
            bucket = buckets.setdefault(skeleton_key(clause), [])
            for pos in bucket:
                if variant_equal(retained[pos].clause, clause):
                    if retained[pos].inference_count > entry.inference_count:
                        retained[pos] = entry
                    return
            bucket.append(len(retained))
            retained.append(entry)
            if cap is not None and len(retained) >= cap:
                raise _CapReached()

        def visit(min_position: int):
            self._tick()
            record()
            t = self.tableau
            if t.inference_count >= k:
                return
            for position in range(min_position, len(t.open_leaves)):
                leaf = t.open_leaves[position]
                subgoal = t.nodes[leaf].literal
                for clause, idx in self.connections(subgoal):
                    if t.push_extension(position, clause, idx):
                        visit(position)
                        t.undo()
                if self.horn:
                    continue
                for anc in tuple(t.ancestors(leaf)):
                    if t.push_reduction(position, anc):
                        visit(position)
                        t.undo()

        try:
            for clause in starts:
                self.tableau = Tableau()
                self.tableau.push_start(clause)
                visit(0)
        except _CapReached:
            self.logger.debug(f"Candidate cap {cap} reached")
        except _Interrupted:
            self.logger.warning("Subgoal enumeration interrupted")
        self.logger.info(
            f"Enumerated {len(retained)} subgoal clauses with resource {k}"
        )
        return retained


def prove(
    problem: Problem,
    mode: Mode = Mode.CTC_NEG,
    bound: Bound = Bound(),
    n0: int = 1,
    step: int = 1,
    max_resource: int | None = None,
    deadline: float | None = None,
    stop: Callable[[], bool] | None = None,
    logger: Logger | None = None,
) -> TableauResult:
    return TableauProver(problem, logger=logger).prove(
        mode, bound, n0, step, max_resource, deadline, stop
    )


def enumerate_subgoal_clauses(
    problem: Problem,
    k: int,
    mode: Mode = Mode.CTC_NEG,
    start_set: list[Clause] | None = None,
    cap: int | None = None,
    logger: Logger | None = None,
) -> list[SubgoalClauseRecord]:
    if k < 1:
        raise ValueError("resource k must be at least 1")
    prover = TableauProver(problem, logger=logger, regularity=False)
    return prover.enumerate(k, mode, start_set, cap)


def replay_tableau_proof(problem: Problem, proof: TableauProof) -> bool:
    """Rebuild the tableau from its steps and check that it closes."""
    by_id = {c.id: c for c in problem.clauses}
    t = Tableau()
    for step in proof.steps:
        if step.rule == START:
            ok = step.clause_id in by_id and t.push_start(by_id[step.clause_id])
        elif step.position >= len(t.open_leaves):
            ok = False
        elif step.rule == EXTENSION:
            clause = by_id.get(step.clause_id)
            ok = (
                clause is not None
                and 0 <= step.literal_index < len(clause.literals)
            ) and t.push_extension(
                step.position, clause, step.literal_index
            )
        else:
            leaf = t.open_leaves[step.position]
            ok = step.ancestor in tuple(t.ancestors(leaf)) and t.push_reduction(
                step.position, step.ancestor
            )
        if not ok or not t.is_connected():
            return False
    return t.is_closed

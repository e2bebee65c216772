"""
Cooperation pipeline: both preprocessings, the two transfer filters,
input augmentation and the race of the connection tableau prover (me)
against the saturation prover (sat).
"""

import io
import json
import logging
import time
from concurrent.futures import (
    FIRST_COMPLETED,
    ProcessPoolExecutor,
    ThreadPoolExecutor,
    wait,
)
from dataclasses import asdict, dataclass, field, replace
from logging import Logger
from multiprocessing import Manager
from pathlib import Path
from typing import Callable

import pandas as pd
from rich.console import Console
from rich.table import Table
from tqdm import tqdm

from cooprover.modules.kernel import CooproverError
from cooprover.modules.lemmas import (
    FilterQuotas,
    LemmaSelector,
    SelectedLemma,
    candidates_from_state,
)
from cooprover.modules.problem_io import (
    Mode,
    Problem,
    add_equality_axioms,
    read_problem,
)
from cooprover.modules.saturation import (
    REFUTATION,
    SATURATED,
    OrderingMode,
    SaturationProver,
    check_derivation,
    make_heuristic,
)
from cooprover.modules.subgoals import ScoredSubgoal, SelectionWeights, SubgoalGenerator
from cooprover.modules.tableau import (
    CLOSED,
    EXHAUSTED,
    Bound,
    TableauProver,
    replay_tableau_proof,
)

ME = "me"
SAT = "sat"
NONE = "none"

PROVED = "proved"
FAULT = "fault"
CANCELLED = "cancelled"
TIMEOUT = "timeout"

UNSAT = "unsat"

# Fraction of the remaining time both preprocessings may use before the race.
PREPROCESS_SHARE = 0.5


@dataclass(frozen=True)
class CooperationConfig:
    mode: Mode = Mode.CTC_NEG
    variant: int = 2
    weights: SelectionWeights = SelectionWeights()
    quotas: FilterQuotas = FilterQuotas()
    activations: int = 2000
    bound: Bound = Bound()
    resource: int = 1
    step: int = 1
    max_resource: int | None = None
    ordering: OrderingMode = OrderingMode.NONE
    heuristic: str = "symbols"
    fifo_period: int = 5
    timeout: float = 300.0
    deterministic: bool = True
    standalone: bool = False

    def __post_init__(self):
        if self.variant not in (1, 2):
            raise ValueError(f"unknown generation variant {self.variant}")
        for name in ("activations", "resource", "step", "timeout", "fifo_period"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass
class Report:
    problem: str
    result: str
    winner: str
    wall_ms: int = 0
    phases: dict = field(
        default_factory=lambda: dict(
            td_preprocess_ms=0, bu_preprocess_ms=0, filter_ms=0, race_ms=0
        )
    )
    counts: dict = field(
        default_factory=lambda: dict(
            subgoal_candidates=0, transferred_subgoals=0, facts=0, lemmas=0
        )
    )
    resource: int = 0
    proof: list | None = None
    standalone: dict | None = None

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("proof", "standalone"):
            if data[key] is None:
                del data[key]
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        return cls(**data)


@dataclass(frozen=True)
class EngineTask:
    name: str
    problem: Problem
    config: CooperationConfig
    deadline: float | None = None
    max_activations: int | None = None


@dataclass(frozen=True)
class EngineOutcome:
    name: str
    status: str
    resource: int = 0
    work: int = 0
    proof: tuple = ()
    verified: bool = False
    error: str = ""


@dataclass
class RaceResult:
    winner: str
    outcomes: dict
    cancelled: list = field(default_factory=list)


def _run_me(task: EngineTask, stop: Callable[[], bool] | None) -> EngineOutcome:
    cfg = task.config
    result = TableauProver(task.problem).prove(
        cfg.mode,
        cfg.bound,
        cfg.resource,
        cfg.step,
        cfg.max_resource,
        task.deadline,
        stop,
    )
    if result.status == CLOSED:
        return EngineOutcome(
            ME,
            PROVED,
            result.resource,
            result.proof.inferences,
            result.proof.lines,
            replay_tableau_proof(task.problem, result.proof),
        )
    if result.status == EXHAUSTED:
        return EngineOutcome(ME, EXHAUSTED, result.resource, result.attempts)
    status = CANCELLED if stop is not None and stop() else TIMEOUT
    return EngineOutcome(ME, status, result.resource, result.attempts)


def _run_sat(task: EngineTask, stop: Callable[[], bool] | None) -> EngineOutcome:
    cfg = task.config
    prover = SaturationProver(
        task.problem,
        make_heuristic(cfg.heuristic, cfg.fifo_period),
        cfg.ordering,
    )
    result = prover.saturate(task.max_activations, task.deadline, stop)
    if result.status == REFUTATION:
        return EngineOutcome(
            SAT,
            PROVED,
            result.activations,
            result.activations,
            tuple(str(step) for step in result.derivation),
            check_derivation(task.problem, result, ordering=cfg.ordering),
        )
    if result.status == SATURATED:
        return EngineOutcome(SAT, EXHAUSTED, result.activations, result.activations)
    status = CANCELLED if stop is not None and stop() else TIMEOUT
    return EngineOutcome(SAT, status, result.activations, result.activations)


def run_engine(task: EngineTask, stop_event=None) -> EngineOutcome:
    """Run one engine; faults come back as an outcome, never raised."""
    stop = stop_event.is_set if stop_event is not None else None
    try:
        if task.name == ME:
            return _run_me(task, stop)
        return _run_sat(task, stop)
    except Exception as e:
        return EngineOutcome(task.name, FAULT, error=f"{type(e).__name__}: {e}")


def race(
    tasks: list[EngineTask], logger: Logger | None = None
) -> RaceResult:
    """
    Run the engines in separate processes. The first proof sets the
    shared stop event; the others are awaited until they acknowledge.
    """
    logger = logger or logging.getLogger("cooprover")
    outcomes: dict[str, EngineOutcome] = {}
    winner = NONE
    with Manager() as manager:
        stop = manager.Event()
        with ProcessPoolExecutor(max_workers=len(tasks)) as executor:
            futures = {executor.submit(run_engine, t, stop): t.name for t in tasks}
            pending = set(futures)
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    name = futures[future]
                    try:
                        outcome = future.result()
                    except Exception as e:
                        outcome = EngineOutcome(name, FAULT, error=str(e))
                    outcomes[name] = outcome
                    if outcome.status == FAULT:
                        logger.error(f"Engine {name} failed: {outcome.error}")
                    elif outcome.status == PROVED and winner == NONE:
                        winner = name
                        logger.info(f"Engine {name} found a proof, stopping the rest")
                        stop.set()
    cancelled = [n for n, o in outcomes.items() if o.status == CANCELLED]
    for name in cancelled:
        logger.debug(f"Engine {name} acknowledged the stop request")
    return RaceResult(winner, outcomes, cancelled)


def race_sequential(
    me: EngineTask, sat: EngineTask, logger: Logger | None = None
) -> RaceResult:
    """
    Reproducible race: the tableau prover runs first, then saturation
    must beat its inference count in activations. Ties go to the tableau
    prover. The tableau prover gets half of the remaining time so that
    saturation always runs.
    """
    logger = logger or logging.getLogger("cooprover")
    if me.deadline is not None:
        now = time.monotonic()
        me = replace(me, deadline=now + max(me.deadline - now, 0.0) / 2)
    me_outcome = run_engine(me)
    if me_outcome.status == PROVED:
        sat = replace(sat, max_activations=max(me_outcome.work - 1, 0))
    sat_outcome = run_engine(sat)
    outcomes = {ME: me_outcome, SAT: sat_outcome}
    for outcome in outcomes.values():
        if outcome.status == FAULT:
            logger.error(f"Engine {outcome.name} failed: {outcome.error}")
    if sat_outcome.status == PROVED:
        winner = SAT
    elif me_outcome.status == PROVED:
        winner = ME
    else:
        winner = NONE
    cancelled = [SAT] if winner == ME else []
    return RaceResult(winner, outcomes, cancelled)


def _ms(seconds: float) -> int:
    return int(round(seconds * 1000))


def _past(moment: float) -> Callable[[], bool]:
    return lambda: time.monotonic() > moment


class Cooperation(object):
    """The one-shot exchange between both provers on a single problem."""

    def __init__(
        self,
        config: CooperationConfig = CooperationConfig(),
        logger: Logger | None = None,
        verbose: bool = False,
    ):
        self.config = config
        self.logger = logger or logging.getLogger("cooprover")
        self.verbose = verbose
        self.subgoals: list[ScoredSubgoal] = []
        self.lemmas: list[SelectedLemma] = []

    def _clock(self) -> Callable[[], float]:
        if self.config.deterministic:
            return lambda: 0.0
        return time.monotonic

    def _task(self, name, problem, deadline) -> EngineTask:
        return EngineTask(name, problem, self.config, deadline)

    def _race(self, me: EngineTask, sat: EngineTask) -> RaceResult:
        if self.config.deterministic:
            return race_sequential(me, sat, self.logger)
        return race([me, sat], self.logger)

    def _preprocess(self, me_problem: Problem, sat: SaturationProver, deadline: float):
        """
        Both preprocessings, cut short once their share of the time is used.
        Whatever was collected until then is handed on.
        """
        cfg = self.config
        clock = self._clock()
        now = time.monotonic()
        phase_end = now + max(deadline - now, 0.0) * PREPROCESS_SHARE
        generator = SubgoalGenerator(
            me_problem, cfg.weights, cfg.mode, logger=self.logger, verbose=self.verbose
        )
        candidates = []
        if cfg.deterministic:
            start = clock()
            try:
                candidates = generator.generate(
                    cfg.variant, stop=_past(now + (phase_end - now) / 2)
                )
            except (CooproverError, ValueError) as e:
                self.logger.error(f"Subgoal generation failed: {e}")
            td_ms = _ms(clock() - start)
            start = clock()
            sat.preprocess(cfg.activations, stop=_past(phase_end))
            return generator, candidates, td_ms, _ms(clock() - start)
        start = clock()
        finished: dict = {}
        with ThreadPoolExecutor(max_workers=1) as executor:
            future = executor.submit(generator.generate, cfg.variant, _past(phase_end))
            future.add_done_callback(lambda _: finished.setdefault("td", clock()))
            sat.preprocess(
                cfg.activations,
                stop=lambda: future.done() or time.monotonic() > phase_end,
            )
            bu_ms = _ms(clock() - start)
            try:
                candidates = future.result()
            except (CooproverError, ValueError) as e:
                self.logger.error(f"Subgoal generation failed: {e}")
        return generator, candidates, _ms(finished.get("td", start) - start), bu_ms

    def run(self, problem: Problem) -> Report:
        cfg = self.config
        clock = self._clock()
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tProblem: {problem.name}"
            f"\n\tMode: {cfg.mode.value}"
            f"\n\tVariant: {cfg.variant}"
            f"\n\tActivations: {cfg.activations}"
            f"\n\tTransferred subgoals: {cfg.weights.m}"
            f"\n\tLemmas per filter: {cfg.quotas.per_filter}"
            f"\n\tTimeout: {cfg.timeout}"
            f"\n\tDeterministic: {cfg.deterministic}\n"
        )
        began = clock()
        report = Report(problem.name, TIMEOUT, NONE)
        if cfg.timeout <= 0:
            self.logger.warning("Zero timeout, nothing to do")
            return report
        deadline = time.monotonic() + cfg.timeout
        me_problem = add_equality_axioms(problem)

        sat = SaturationProver(
            problem,
            make_heuristic(cfg.heuristic, cfg.fifo_period),
            cfg.ordering,
            logger=self.logger,
            verbose=self.verbose,
        )
        generator, candidates, td_ms, bu_ms = self._preprocess(me_problem, sat, deadline)
        report.phases["td_preprocess_ms"] = td_ms
        report.phases["bu_preprocess_ms"] = bu_ms
        report.counts["subgoal_candidates"] = len(candidates)

        if generator.proof_found is not None:
            self.logger.info("Tableau closed during subgoal generation")
            return self._finish(
                report, ME, generator.proof_found.resource,
                generator.proof_found.lines, began, clock,
            )
        trace = sat.state.trace
        if trace and trace[-1].is_empty:
            self.logger.info("Refutation found during saturation preprocessing")
            derivation = sat.state.derivation(trace[-1].id)
            return self._finish(
                report, SAT, sat.state.activation_counter,
                tuple(str(s) for s in derivation), began, clock,
            )

        start = clock()
        facts = candidates_from_state(sat.state)
        self.subgoals = generator.select(candidates)
        pool = [s.record.clause for s in generator.select(candidates, len(candidates))]
        self.lemmas = LemmaSelector(cfg.quotas, self.logger, self.verbose).select(
            facts, pool, problem.has_equality, sat.state.derivations
        )
        report.phases["filter_ms"] = _ms(clock() - start)
        report.counts["transferred_subgoals"] = len(self.subgoals)
        report.counts["facts"] = len(facts)
        report.counts["lemmas"] = len(self.lemmas)

        me_final = me_problem.extend([lemma.clause for lemma in self.lemmas])
        sat_final = problem.extend([s.clause for s in self.subgoals])
        start = clock()
        result = self._race(
            self._task(ME, me_final, deadline), self._task(SAT, sat_final, deadline)
        )
        report.phases["race_ms"] = _ms(clock() - start)

        if cfg.standalone:
            alone = self._race(
                self._task(ME, me_problem, deadline), self._task(SAT, problem, deadline)
            )
            report.standalone = {
                name: outcome.status for name, outcome in sorted(alone.outcomes.items())
            }

        if result.winner == NONE:
            statuses = {o.status for o in result.outcomes.values()}
            report.result = EXHAUSTED if statuses == {EXHAUSTED} else TIMEOUT
            report.wall_ms = _ms(clock() - began)
            return report
        outcome = result.outcomes[result.winner]
        if not outcome.verified:
            self.logger.error(f"Proof of engine {result.winner} failed to replay")
        return self._finish(
            report, result.winner, outcome.resource, outcome.proof, began, clock
        )

    def _finish(self, report, winner, resource, proof, began, clock) -> Report:
        report.result = UNSAT
        report.winner = winner
        report.resource = resource
        report.proof = list(proof)
        report.wall_ms = _ms(clock() - began)
        self.logger.info(f"Problem {report.problem}: {report.result} by {winner}")
        return report


def run_pipeline(
    config: CooperationConfig, problem: Problem, logger: Logger | None = None
) -> Report:
    return Cooperation(config, logger).run(problem)


def emit_report(report: Report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=4)
    if fmt != "text":
        raise ValueError(f"unknown report format '{fmt}'")
    table = Table(title=f"Problem {report.problem}")
    table.add_column("Field")
    table.add_column("Value")
    table.add_row("result", report.result)
    table.add_row("winner", report.winner)
    table.add_row("wall_ms", str(report.wall_ms))
    for key, value in report.phases.items():
        table.add_row(key, str(value))
    for key, value in report.counts.items():
        table.add_row(key, str(value))
    table.add_row("resource", str(report.resource))
    for key, value in (report.standalone or {}).items():
        table.add_row(f"standalone {key}", value)
    sio = io.StringIO()
    console = Console(file=sio, width=100)
    console.print(table)
    for line in report.proof or ():
        console.print(line, markup=False, highlight=False)
    return sio.getvalue()


def parse_report(text: str) -> Report:
    return Report.from_dict(json.loads(text))


class BatchRunner(object):
    """
    Runs the pipeline on every problem file of a directory. Each worker
    process handles whole problems, so races inside a worker are run
    sequentially.
    """

    def __init__(
        self,
        input: Path,
        output: Path,
        config: CooperationConfig,
        jobs: int,
        logger: Logger,
        verbose: bool = False,
    ):
        self.input = Path(input)
        self.output = Path(output)
        self.config = replace(config, deterministic=True)
        self.jobs = jobs
        self.logger = logger
        self.verbose = verbose

    def _problem_files(self) -> list[Path]:
        return sorted(self.input.glob("*.p"))

    def _solve(self, path: Path) -> dict:
        try:
            report = Cooperation(self.config, self.logger).run(read_problem(path))
        except CooproverError as e:
            self.logger.error(f"Skipping {path.name}: {e}")
            return dict(
                problem=path.stem, result="error", winner=NONE, wall_ms=0,
                transferred_subgoals=0, lemmas=0,
            )
        with open(self.output.parent / f"{path.stem}.json", "w") as f:
            f.write(emit_report(report, "json"))
        return dict(
            problem=report.problem,
            result=report.result,
            winner=report.winner,
            wall_ms=report.wall_ms,
            transferred_subgoals=report.counts["transferred_subgoals"],
            lemmas=report.counts["lemmas"],
        )

    def start(self) -> pd.DataFrame:
        paths = self._problem_files()
        self.logger.info(f"Solving problems from: {self.input}")
        self.logger.info(
            f"PARAMS:\n"
            f"\n\tProblems: {len(paths)}"
            f"\n\tOutput: {self.output}"
            f"\n\tConcurrent jobs: {self.jobs}\n"
        )
        if not self.output.parent.exists():
            self.output.parent.mkdir(parents=True)
        with ProcessPoolExecutor(max_workers=self.jobs) as executor:
            futures = []
            if not self.verbose:
                with tqdm(total=len(paths)) as progress:
                    for path in paths:
                        future = executor.submit(self._solve, path)
                        future.add_done_callback(lambda _: progress.update())
                        futures.append(future)
                    rows = [f.result() for f in futures]
            else:
                futures = [executor.submit(self._solve, path) for path in paths]
                rows = [f.result() for f in futures]
        summary = pd.DataFrame(
            rows,
            columns=[
                "problem", "result", "winner", "wall_ms",
                "transferred_subgoals", "lemmas",
            ],
        )
        summary.to_csv(self.output, sep="\t", index=False)
        solved = int((summary["result"] == UNSAT).sum())
        self.logger.info(f"Solved {solved} of {len(paths)} problems")
        return summary

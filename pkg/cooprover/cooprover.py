import io
import json
import sys
from pathlib import Path
from time import localtime, monotonic, strftime

import click
import pandas as pd
from rich.console import Console

from cooprover._version import __version__
from cooprover.modules.config import load_config
from cooprover.modules.kernel import ConfigError, OracleBudgetExceeded, ParseError
from cooprover.modules.lemmas import (
    FilterQuotas,
    LemmaSelector,
    candidates_from_state,
)
from cooprover.modules.logger import CooproverLogger
from cooprover.modules.oracle import min_proof_length
from cooprover.modules.orchestrator import (
    ME,
    PROVED,
    SAT,
    UNSAT,
    BatchRunner,
    Cooperation,
    CooperationConfig,
    EngineTask,
    emit_report,
    run_engine,
)
from cooprover.modules.problem_io import (
    Mode,
    add_equality_axioms,
    read_problem,
    serialize_clause,
)
from cooprover.modules.saturation import (
    Calculus,
    OrderingMode,
    SaturationProver,
    make_heuristic,
)
from cooprover.modules.subgoals import SelectionWeights, SubgoalGenerator
from cooprover.modules.tableau import Bound, BoundKind

ASCII = r"""
  ____
 / ___|___   ___  _ __  _ __ _____   _____ _ __
| |   / _ \ / _ \| '_ \| '__/ _ \ \ / / _ \ '__|
| |__| (_) | (_) | |_) | | | (_) \ V /  __/ |
 \____\___/ \___/| .__/|_|  \___/ \_/ \___|_|
                 |_|
"""

EXIT_PROVED = 0
EXIT_NO_RESULT = 1
EXIT_INPUT_ERROR = 2


def _option_rows(console: Console, ctx, params) -> None:
    for param in params:
        record = param.get_help_record(ctx)
        if record is None:
            continue
        default_value = str(param.get_default(ctx))
        if len(default_value) > 10:
            default_value = "..." + default_value[-7:]
        console.print(
            f"\t{record[0]:<40}{'[ ' + default_value + ' ]':<25}{record[1]:<40}",
            markup=False,
            highlight=False,
        )


class RichGroup(click.Group):
    def format_help(self, ctx, formatter):
        sio = io.StringIO()
        console = Console(file=sio, force_terminal=True)
        console.print(f"[bold magenta]{ASCII}[/bold magenta]")
        console.print(
            "[bold green]Cooperative theorem proving: a connection tableau "
            "prover and a saturation prover exchanging subgoals "
            "and lemmas.[/bold green]"
        )
        console.print(f"\n\n[bold yellow]{self.get_usage(ctx)}[/bold yellow]")
        console.print(
            "\n[bold yellow]To display help message for a command, run:"
            "\n\n\tcooprover COMMAND -h[/bold yellow]"
        )
        console.print("\nOptions:")
        _option_rows(console, ctx, self.get_params(ctx))
        console.print("\nCommands:")
        for cmd_name in self.list_commands(ctx):
            cmd = self.get_command(ctx, cmd_name)
            console.print(f"\t{cmd_name:<65}{cmd.get_short_help_str(ctx):<40}")
        console.print("\n")
        formatter.write(sio.getvalue())


class RichCommand(click.Command):
    def format_help(self, ctx, formatter):
        sio = io.StringIO()
        console = Console(file=sio, force_terminal=True)
        console.print(f"\n[bold yellow]{self.get_usage(ctx)}[/bold yellow]")
        console.print("\nOptions:")
        _option_rows(console, ctx, self.get_params(ctx))
        formatter.write(sio.getvalue())


def _read_config(ctx, param, value):
    if value is None:
        return None
    try:
        values = load_config(Path(value))
    except ConfigError as e:
        raise click.BadParameter(str(e), ctx=ctx, param=param)
    ctx.default_map = {**(ctx.default_map or {}), **values}
    return value


def _apply(options):
    def decorator(f):
        for option in reversed(options):
            f = option(f)
        return f

    return decorator


INPUT = [
    click.option(
        "--input",
        "-i",
        required=True,
        help="Path to problem file",
        type=Path,
    ),
    click.option(
        "--config",
        "-c",
        default=None,
        help="Path to key = value configuration file",
        type=click.Path(dir_okay=False),
        callback=_read_config,
        is_eager=True,
        expose_value=False,
    ),
]

LOGGING = [
    click.option(
        "--log",
        "-l",
        default=Path(".").absolute() / "logs",
        help="Path to logs output directory",
        type=Path,
    ),
    click.option(
        "--logging-level",
        "-L",
        default=0,
        help="Logging level "
        "(0 - debug, 1 - info, 2 - warning, 3 - error, 4 - critical)",
        type=int,
    ),
    click.option(
        "--verbose",
        "-v",
        is_flag=True,
        default=False,
        help="Print debug messages to stdout",
    ),
]

TABLEAU = [
    click.option(
        "--mode",
        default="ctcneg",
        help="Start clauses: all (ctc) or negative and goal clauses (ctcneg)",
        type=click.Choice(["ctc", "ctcneg"]),
    ),
    click.option(
        "--bound",
        default="inference",
        help="Completeness bound",
        type=click.Choice(["depth", "inference", "weighted"]),
    ),
    click.option("--resource", default=1, help="Initial resource", type=int),
    click.option("--step", default=1, help="Resource increment", type=int),
    click.option(
        "--depth-factor",
        default=0.5,
        help="Depth factor of the weighted bound",
        type=float,
    ),
    click.option(
        "--inference-factor",
        default=2.0,
        help="Inference factor of the weighted bound",
        type=float,
    ),
]

SATURATION = [
    click.option(
        "--heuristic",
        default="symbols",
        help="Clause selection: symbols, fifo, recent, hi:<i> or hi:<i>:<predicate>",
        type=str,
    ),
    click.option(
        "--fifo-period",
        default=5,
        help="Every n-th activation takes the oldest clause (0 disables)",
        type=int,
    ),
    click.option(
        "--ordering",
        default="none",
        help="Term ordering restricting inferences",
        type=click.Choice(["none", "precedence"]),
    ),
]

SUBGOALS = [
    click.option(
        "--variant",
        default=2,
        help="Subgoal generation: fixed resource (1) or refined (2)",
        type=click.IntRange(1, 2),
    ),
    click.option("--k", "k", default=10, help="Resource of variant 1", type=int),
    click.option("--nsg", default=500, help="Candidate cap of variant 1", type=int),
    click.option("--k1", default=9, help="First resource of variant 2", type=int),
    click.option("--k2", default=9, help="Refinement resource of variant 2", type=int),
    click.option("--nref", default=5, help="Clauses refined by variant 2", type=int),
    click.option(
        "--max-subgoals",
        default=30,
        help="Subgoal clauses transferred to saturation",
        type=int,
    ),
    click.option("--alpha1", default=10.0, help="Weight of inference count", type=float),
    click.option("--alpha2", default=5.0, help="Weight of clause heuristic", type=float),
    click.option("--alpha3", default=1.0, help="Weight of unit similarity", type=float),
]

LEMMAS = [
    click.option(
        "--activations",
        default=2000,
        help="Activations of saturation preprocessing",
        type=int,
    ),
    click.option(
        "--lemmas-per-filter",
        default=10,
        help="Lemmas selected by each filter",
        type=int,
    ),
]

RUN = [
    click.option("--timeout", default=300.0, help="Timeout in seconds", type=float),
    click.option(
        "--output",
        "-o",
        default="json",
        help="Report format",
        type=click.Choice(["json", "text"]),
    ),
]

PIPELINE = [
    click.option(
        "--deterministic/--concurrent",
        default=True,
        help="Sequential reproducible phases or concurrent engines",
    ),
    click.option(
        "--standalone",
        is_flag=True,
        default=False,
        help="Also run both engines without cooperation",
    ),
]


def _logger(log, name, logging_level, verbose):
    start_time = strftime(r"%Y-%m-%d_%H%M%S", localtime())
    return CooproverLogger(
        Path(log).absolute(), name, start_time, logging_level, verbose
    )


def _problem(path, logger):
    try:
        return read_problem(Path(path))
    except (OSError, ParseError) as e:
        logger.error(f"Cannot read problem {path}: {e}")
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


def _weights(kw) -> SelectionWeights:
    return SelectionWeights(
        kw["alpha1"], kw["alpha2"], kw["alpha3"],
        kw["k"], kw["k1"], kw["k2"], kw["nsg"], kw["nref"], kw["max_subgoals"],
    )


def _bound(kw) -> Bound:
    return Bound(
        BoundKind(kw["bound"]), kw["depth_factor"], kw["inference_factor"]
    )


def _cooperation_config(kw, logger) -> CooperationConfig:
    try:
        return CooperationConfig(
            mode=Mode(kw["mode"]),
            variant=kw["variant"],
            weights=_weights(kw),
            quotas=FilterQuotas(kw["lemmas_per_filter"]),
            activations=kw["activations"],
            bound=_bound(kw),
            resource=kw["resource"],
            step=kw["step"],
            ordering=OrderingMode(kw["ordering"]),
            heuristic=kw["heuristic"],
            fifo_period=kw["fifo_period"],
            timeout=kw["timeout"],
            deterministic=kw["deterministic"],
            standalone=kw["standalone"],
        )
    except (ConfigError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


def _write(lines: list[str], output_file: Path | None) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if output_file is None:
        click.echo(text, nl=False)
        return
    with open(output_file, "w") as f:
        f.write(text)


@click.group(
    cls=RichGroup,
    context_settings=dict(help_option_names=["-h", "--help"]),
    invoke_without_command=True,
    no_args_is_help=True,
)
@click.option("--version", "-V", is_flag=True, help="Show version")
def cli(version):
    if version:
        print(f"\n\tcooprover version: {__version__}")


@cli.command(
    "solve",
    short_help="Run the cooperation of both provers on a problem",
    cls=RichCommand,
)
@_apply(INPUT + TABLEAU + SATURATION + SUBGOALS + LEMMAS + RUN + PIPELINE + LOGGING)
def solve(input, output, log, logging_level, verbose, **kw):
    logger = _logger(log, "solve", logging_level, verbose)
    problem = _problem(input, logger)
    config = _cooperation_config(kw, logger)
    report = Cooperation(config, logger, verbose).run(problem)
    click.echo(emit_report(report, output))
    sys.exit(EXIT_PROVED if report.result == UNSAT else EXIT_NO_RESULT)


# values the single-engine commands do not expose
SOLVE_DEFAULTS = dict(
    variant=2, alpha1=10.0, alpha2=5.0, alpha3=1.0, k=10, k1=9, k2=9,
    nsg=500, nref=5, max_subgoals=30, lemmas_per_filter=10, activations=2000,
    mode="ctcneg", bound="inference", resource=1, step=1, depth_factor=0.5,
    inference_factor=2.0, heuristic="symbols", fifo_period=5, ordering="none",
    deterministic=True, standalone=False,
)


def _engine(name, input, output, log, logging_level, verbose, kw):
    logger = _logger(log, name, logging_level, verbose)
    problem = _problem(input, logger)
    if name == ME:
        problem = add_equality_axioms(problem)
    kw = {**SOLVE_DEFAULTS, **kw}
    config = _cooperation_config(kw, logger)
    task = EngineTask(
        name,
        problem,
        config,
        deadline=monotonic() + config.timeout,
        max_activations=kw.get("max_activations"),
    )
    outcome = run_engine(task)
    logger.info(f"Engine {name} finished with status {outcome.status}")
    if output == "json":
        click.echo(
            json.dumps(
                dict(
                    problem=problem.name,
                    status=outcome.status,
                    resource=outcome.resource,
                    proof=list(outcome.proof),
                ),
                indent=4,
            )
        )
    else:
        click.echo(f"{problem.name}: {outcome.status} (resource {outcome.resource})")
        for line in outcome.proof:
            click.echo(line)
    sys.exit(EXIT_PROVED if outcome.status == PROVED else EXIT_NO_RESULT)


@cli.command(
    "me",
    short_help="Run the connection tableau prover alone",
    cls=RichCommand,
)
@_apply(INPUT + TABLEAU + RUN + LOGGING)
def me(input, output, log, logging_level, verbose, **kw):
    _engine(ME, input, output, log, logging_level, verbose, kw)


@cli.command(
    "sat",
    short_help="Run the saturation prover alone",
    cls=RichCommand,
)
@_apply(INPUT + SATURATION + RUN + LOGGING)
@click.option(
    "--max-activations",
    default=None,
    help="Stop after this many activations",
    type=int,
)
def sat(input, output, log, logging_level, verbose, **kw):
    _engine(SAT, input, output, log, logging_level, verbose, kw)


@cli.command(
    "subgoals",
    short_help="Generate and select subgoal clauses",
    cls=RichCommand,
)
@_apply(INPUT + TABLEAU[:1] + SUBGOALS + LOGGING)
@click.option(
    "--output-file",
    "-o",
    default=None,
    help="Write clauses here and metadata next to it (.tsv)",
    type=Path,
)
def subgoals(input, output_file, log, logging_level, verbose, mode, variant, **kw):
    logger = _logger(log, "subgoals", logging_level, verbose)
    problem = add_equality_axioms(_problem(input, logger))
    try:
        weights = _weights(kw)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        sys.exit(EXIT_INPUT_ERROR)
    generator = SubgoalGenerator(problem, weights, Mode(mode), logger=logger, verbose=verbose)
    selected = generator.select(generator.generate(variant))
    _write(
        [serialize_clause(s.clause, f"sg{n}") for n, s in enumerate(selected, 1)],
        output_file,
    )
    if output_file is not None:
        metadata = pd.DataFrame(
            [
                dict(
                    id=f"sg{n}",
                    inferences=s.record.inference_count,
                    start_clause=s.record.start_clause,
                    phi=s.phi,
                )
                for n, s in enumerate(selected, 1)
            ],
            columns=["id", "inferences", "start_clause", "phi"],
        )
        metadata.to_csv(Path(f"{output_file}.tsv"), sep="\t", index=False)
    sys.exit(EXIT_PROVED if selected else EXIT_NO_RESULT)


@cli.command(
    "lemmas",
    short_help="Extract and filter lemmas from saturation",
    cls=RichCommand,
)
@_apply(INPUT + TABLEAU[:1] + SATURATION + SUBGOALS + LEMMAS + LOGGING)
@click.option(
    "--output-file",
    "-o",
    default=None,
    help="Write clauses here and metadata next to it (.tsv)",
    type=Path,
)
def lemmas(input, output_file, log, logging_level, verbose, **kw):
    logger = _logger(log, "lemmas", logging_level, verbose)
    problem = _problem(input, logger)
    try:
        weights = _weights(kw)
        quotas = FilterQuotas(kw["lemmas_per_filter"])
        heuristic = make_heuristic(kw["heuristic"], kw["fifo_period"])
    except (ConfigError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        sys.exit(EXIT_INPUT_ERROR)
    prover = SaturationProver(
        problem, heuristic, OrderingMode(kw["ordering"]), logger=logger, verbose=verbose
    )
    prover.preprocess(kw["activations"])
    generator = SubgoalGenerator(
        add_equality_axioms(problem), weights, Mode(kw["mode"]), logger=logger
    )
    candidates = generator.generate(kw["variant"])
    pool = [s.record.clause for s in generator.select(candidates, len(candidates))]
    selected = LemmaSelector(quotas, logger, verbose).select(
        candidates_from_state(prover.state),
        pool,
        problem.has_equality,
        prover.state.derivations,
    )
    _write(
        [serialize_clause(s.clause, f"lemma{n}") for n, s in enumerate(selected, 1)],
        output_file,
    )
    if output_file is not None:
        metadata = pd.DataFrame(
            [
                dict(
                    id=f"lemma{n}",
                    filter=s.filter,
                    score=s.score,
                    epsilon=s.candidate.epsilon,
                    kappa=s.candidate.kappa,
                    psi_d=s.psi_d,
                )
                for n, s in enumerate(selected, 1)
            ],
            columns=["id", "filter", "score", "epsilon", "kappa", "psi_d"],
        )
        metadata.to_csv(Path(f"{output_file}.tsv"), sep="\t", index=False)
    sys.exit(EXIT_PROVED if selected else EXIT_NO_RESULT)


@cli.command(
    "oracle",
    short_help="Exact minimal refutation length of a small problem",
    cls=RichCommand,
)
@_apply(INPUT + LOGGING)
@click.option(
    "--calculus",
    default="resolution",
    help="Inference rules searched",
    type=click.Choice(["resolution", "superposition"]),
)
@click.option(
    "--ordering",
    default="none",
    help="Term ordering restricting inferences",
    type=click.Choice(["none", "precedence"]),
)
@click.option("--max-length", default=12, help="Longest proof searched", type=int)
@click.option("--budget", default=2_000_000, help="Search node budget", type=int)
def oracle(input, calculus, ordering, max_length, budget, log, logging_level, verbose):
    logger = _logger(log, "oracle", logging_level, verbose)
    problem = _problem(input, logger)
    logger.info(
        f"PARAMS:\n"
        f"\n\tProblem: {problem.name}"
        f"\n\tCalculus: {calculus}"
        f"\n\tOrdering: {ordering}"
        f"\n\tMax length: {max_length}"
        f"\n\tBudget: {budget}\n"
    )
    try:
        length = min_proof_length(
            problem, Calculus(calculus), OrderingMode(ordering), max_length, budget
        )
    except OracleBudgetExceeded as e:
        logger.error(str(e))
        click.echo("budget exceeded")
        sys.exit(EXIT_NO_RESULT)
    click.echo("none" if length is None else str(length))
    sys.exit(EXIT_NO_RESULT if length is None else EXIT_PROVED)


@cli.command(
    "batch",
    short_help="Run the cooperation on every problem in a directory",
    cls=RichCommand,
)
@click.option(
    "--input",
    "-i",
    required=True,
    help="Path to directory with problem files",
    type=Path,
)
@click.option(
    "--output",
    "-o",
    default=Path(".").absolute() / "results" / "summary.tsv",
    help="Path to summary table",
    type=Path,
)
@click.option(
    "--jobs",
    "-j",
    default=1,
    help="Number of concurrent jobs",
    type=int,
)
@_apply(TABLEAU + SATURATION + SUBGOALS + LEMMAS + RUN[:1] + LOGGING)
def batch(input, output, jobs, log, logging_level, verbose, **kw):
    logger = _logger(log, "batch", logging_level, verbose)
    if not Path(input).is_dir():
        logger.error(f"Not a directory: {input}")
        sys.exit(EXIT_INPUT_ERROR)
    config = _cooperation_config(
        {**kw, "deterministic": True, "standalone": False}, logger
    )
    runner = BatchRunner(
        input=Path(input).absolute(),
        output=Path(output).absolute(),
        config=config,
        jobs=jobs,
        logger=logger,
        verbose=verbose,
    )
    summary = runner.start()
    solved = (summary["result"] == UNSAT).any()
    sys.exit(EXIT_PROVED if solved else EXIT_NO_RESULT)


if __name__ == "__main__":
    cli()

import json
import shutil
from pathlib import Path

import pandas as pd
from click.testing import CliRunner

from cooprover._version import __version__
from cooprover.cooprover import cli

LOGS_PATH = Path("tests/logs").absolute()
DATA_PATH = Path("tests/data").absolute()

SMALL = ["--k1", "3", "--k2", "2", "--nref", "2", "--activations", "50"]


def invoke(*args):
    return CliRunner().invoke(cli, [*args, "--log", str(LOGS_PATH)])


def test_help():
    result = CliRunner().invoke(cli, ["-h"])
    assert result.exit_code == 0
    for command in ("solve", "me", "sat", "subgoals", "lemmas", "oracle", "batch"):
        assert command in result.output


def test_version():
    result = CliRunner().invoke(cli, ["-V"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_solve_proved():
    result = invoke("solve", "-i", str(DATA_PATH / "congruence_k2.p"), *SMALL)
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["result"] == "unsat"
    assert report["winner"] == "me"


def test_solve_no_result():
    result = invoke("solve", "-i", str(DATA_PATH / "two_branches.p"), *SMALL)
    assert result.exit_code == 1
    assert json.loads(result.output)["result"] == "exhausted"


def test_solve_text_report():
    result = invoke(
        "solve", "-i", str(DATA_PATH / "congruence_k2.p"), *SMALL, "-o", "text"
    )
    assert result.exit_code == 0
    assert "winner" in result.output


def test_solve_input_errors(tmp_path):
    result = invoke("solve", "-i", str(DATA_PATH / "bad_arity.p"))
    assert result.exit_code == 2
    assert "error" in result.output

    result = invoke("solve", "-i", str(tmp_path / "missing.p"))
    assert result.exit_code == 2

    config = tmp_path / "bad.cfg"
    config.write_text("k1 = -1\n")
    result = invoke("solve", "-i", str(DATA_PATH / "two_branches.p"), "-c", str(config))
    assert result.exit_code == 2


def test_config_file_sets_defaults(tmp_path):
    output = tmp_path / "subgoals.p"
    result = invoke(
        "subgoals",
        "-i",
        str(DATA_PATH / "nine_step.p"),
        "-c",
        str(DATA_PATH / "example.cfg"),
        "-o",
        str(output),
    )
    assert result.exit_code == 0
    lines = output.read_text().splitlines()
    # max-subgoals = 5 in the file
    assert 1 <= len(lines) <= 5


def test_me_and_sat():
    problem = str(DATA_PATH / "recent_trace.p")
    result = invoke("me", "-i", problem)
    assert result.exit_code == 0
    assert json.loads(result.output)["status"] == "proved"

    result = invoke("sat", "-i", problem)
    assert result.exit_code == 0
    assert json.loads(result.output)["proof"][-1].endswith("$false")

    result = invoke("sat", "-i", problem, "--max-activations", "3")
    assert result.exit_code == 1
    assert json.loads(result.output)["status"] == "timeout"


def test_subgoals_output(tmp_path):
    output = tmp_path / "subgoals.p"
    result = invoke(
        "subgoals", "-i", str(DATA_PATH / "two_branches.p"), *SMALL[:6], "-o", str(output)
    )
    assert result.exit_code == 0
    lines = output.read_text().splitlines()
    assert sorted(line.split(",", 2)[2] for line in lines) == [
        "(~p1 | ~p2)).",
        "(~q1 | ~q2)).",
    ]
    metadata = pd.read_csv(f"{output}.tsv", sep="\t")
    assert list(metadata.columns) == ["id", "inferences", "start_clause", "phi"]
    assert list(metadata["inferences"]) == [2, 2]


def test_lemmas_output(tmp_path):
    output = tmp_path / "lemmas.p"
    result = invoke(
        "lemmas", "-i", str(DATA_PATH / "split_weight.p"), *SMALL[:6],
        "--activations", "20", "-o", str(output),
    )
    assert result.exit_code in (0, 1)
    assert output.exists()
    metadata = pd.read_csv(f"{output}.tsv", sep="\t")
    assert list(metadata.columns) == [
        "id", "filter", "score", "epsilon", "kappa", "psi_d"
    ]
    assert len(metadata) == len(output.read_text().splitlines())


def test_oracle():
    result = invoke(
        "oracle", "-i", str(DATA_PATH / "factoring_k2.p"), "--max-length", "4"
    )
    assert result.exit_code == 0
    assert result.output.strip() == "3"

    result = invoke("oracle", "-i", str(DATA_PATH / "two_branches.p"))
    assert result.exit_code == 1
    assert result.output.strip() == "none"


def test_batch(tmp_path):
    problems = tmp_path / "problems"
    problems.mkdir()
    for name in ("two_branches", "congruence_k2"):
        shutil.copy(DATA_PATH / f"{name}.p", problems)
    output = tmp_path / "summary.tsv"
    result = invoke("batch", "-i", str(problems), "-o", str(output), *SMALL)
    assert result.exit_code == 0
    summary = pd.read_csv(output, sep="\t")
    assert list(summary["result"]) == ["unsat", "exhausted"]

    result = invoke("batch", "-i", str(problems / "two_branches.p"))
    assert result.exit_code == 2

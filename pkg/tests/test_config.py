from pathlib import Path

import pytest

from cooprover.modules.config import load_config, parse_config
from cooprover.modules.kernel import ConfigError

DATA_PATH = Path("tests/data").absolute()


def test_load_config():
    values = load_config(DATA_PATH / "example.cfg")
    assert values == dict(
        mode="ctc",
        variant=1,
        k=4,
        max_subgoals=5,
        activations=50,
        alpha1=20.0,
        alpha2=4.0,
        alpha3=2.0,
        deterministic=True,
    )


def test_parse_config_comments_and_blank_lines():
    text = "\n# nothing\nstandalone = off  # inline\nfifo_period=3\n"
    assert parse_config(text) == dict(standalone=False, fifo_period=3)


@pytest.mark.parametrize(
    "text,message",
    [
        ("speed = 3", "unknown key 'speed'"),
        ("k = many", "not a valid int"),
        ("k = -2", "nonnegative"),
        ("mode = forward", "must be one of ctc, ctcneg"),
        ("deterministic = maybe", "not a boolean"),
        ("just words", "expected 'key = value'"),
        ("alpha1 = 1\nalpha2 = 2\nalpha3 = 0", "alpha1 > alpha2 > alpha3"),
    ],
)
def test_parse_config_errors(text, message):
    with pytest.raises(ConfigError) as e:
        parse_config(text, "run.cfg")
    assert message in str(e.value)
    assert "run.cfg" in str(e.value)


def test_parse_config_reports_line():
    with pytest.raises(ConfigError) as e:
        parse_config("k = 3\n\nnref = x", "run.cfg")
    assert "run.cfg:3" in str(e.value)


def test_load_missing_config():
    with pytest.raises(ConfigError):
        load_config(DATA_PATH / "missing.cfg")

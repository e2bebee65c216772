"""
`key = value` configuration files. Keys mirror the long CLI flags
(dashes or underscores) and become the click default map, so flags given
on the command line still win.
"""

from pathlib import Path

from cooprover.modules.kernel import ConfigError

# key -> converter
KEYS = {
    "mode": str,
    "variant": int,
    "bound": str,
    "resource": int,
    "step": int,
    "depth_factor": float,
    "inference_factor": float,
    "k": int,
    "nsg": int,
    "k1": int,
    "k2": int,
    "nref": int,
    "max_subgoals": int,
    "lemmas_per_filter": int,
    "activations": int,
    "fifo_period": int,
    "heuristic": str,
    "ordering": str,
    "timeout": float,
    "deterministic": bool,
    "standalone": bool,
    "alpha1": float,
    "alpha2": float,
    "alpha3": float,
    "jobs": int,
    "logging_level": int,
}

CHOICES = {
    "mode": ("ctc", "ctcneg"),
    "bound": ("depth", "inference", "weighted"),
    "ordering": ("none", "precedence"),
}

TRUE = ("1", "true", "yes", "on")
FALSE = ("0", "false", "no", "off")


def _convert(key: str, raw: str, where: str):
    kind = KEYS[key]
    if kind is bool:
        lowered = raw.lower()
        if lowered in TRUE:
            return True
        if lowered in FALSE:
            return False
        raise ConfigError(f"{where}: '{raw}' is not a boolean for '{key}'")
    try:
        value = kind(raw)
    except ValueError:
        raise ConfigError(
            f"{where}: '{raw}' is not a valid {kind.__name__} for '{key}'"
        ) from None
    if key in CHOICES and value not in CHOICES[key]:
        raise ConfigError(
            f"{where}: '{key}' must be one of {', '.join(CHOICES[key])}"
        )
    if kind in (int, float) and value < 0:
        raise ConfigError(f"{where}: '{key}' must be nonnegative")
    return value


def parse_config(text: str, source: str = "<config>") -> dict:
    values = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{number}"
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key '{key}'")
        values[key] = _convert(key, raw, where)
    alphas = [values.get(f"alpha{i}") for i in (1, 2, 3)]
    if all(a is not None for a in alphas) and not (
        alphas[0] > alphas[1] > alphas[2] >= 0
    ):
        raise ConfigError(f"{source}: need alpha1 > alpha2 > alpha3 >= 0")
    return values


def load_config(path: Path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    return parse_config(text, str(path))

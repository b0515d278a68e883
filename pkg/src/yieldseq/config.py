"""Run configuration read from an INI-style ``key = value`` file."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from yieldseq.models.network import ModelKind
from yieldseq.training import Hyperparameters


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    input: str = "data.csv"
    out: str = "out"
    model_file: str = ""
    top_n: int = 3000
    excluded_sectors: tuple[str, ...] = ("Financials",)
    split_ratio: float = 0.8
    kind: ModelKind = ModelKind.LSTM
    kinds: tuple[ModelKind, ...] = (ModelKind.FNN, ModelKind.LSTM, ModelKind.GRU)
    hp: Hyperparameters = field(default_factory=Hyperparameters)
    grid: dict[str, tuple] = field(default_factory=lambda: {"hidden_layers": (1, 2, 3),
                                                            "hidden_neurons": (40, 50, 60)})
    workers: int = 1
    synth_companies: int = 200
    synth_quarters: int = 40

    @property
    def seed(self) -> int:
        return self.hp.seed

    def model_path(self, kind: ModelKind) -> Path:
        if self.model_file:
            return Path(self.out) / self.model_file
        return Path(self.out) / f"model_{ModelKind(kind).value}.txt"


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in _list(text))


def _list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


HP_TYPES = {f.name: f.type for f in dataclasses.fields(Hyperparameters)}


def _hp_value(name: str, text: str):
    if name in ("learning_rate",):
        return float(text)
    if name == "activation":
        return text.strip().lower()
    return int(text)


# section -> key -> (RunConfig attribute or hp field, parser)
SCHEMA = {
    "data": {
        "input": ("input", str),
        "top_n": ("top_n", int),
        "excluded_sectors": ("excluded_sectors", _list),
        "split_ratio": ("split_ratio", float),
    },
    "model": {
        "kind": ("kind", lambda s: ModelKind(s.strip().lower())),
        "kinds": ("kinds", lambda s: tuple(ModelKind(k.lower()) for k in _list(s))),
        **{name: ("hp." + name, lambda s, n=name: _hp_value(n, s))
           for name in ("hidden_neurons", "hidden_layers", "activation", "learning_rate",
                        "epochs", "batch_size")},
    },
    "run": {
        "seed": ("hp.seed", int),
        "out": ("out", str),
        "model_file": ("model_file", str),
        "workers": ("workers", int),
    },
    "synth": {
        "companies": ("synth_companies", int),
        "quarters": ("synth_quarters", int),
    },
}


def load_config(path=None, text: str | None = None) -> RunConfig:
    """Defaults, overlaid with a config file. Unknown sections or keys are errors.

    The ``[grid]`` section maps hyperparameter names to comma-separated
    candidate lists; if present it replaces the default grid.
    """
    cfg = RunConfig()
    if path is None and text is None:
        return cfg
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        if text is not None:
            parser.read_string(text)
        else:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc.message}") from exc

    hp_changes = {}
    for section in parser.sections():
        if section == "grid":
            grid = {}
            for key, value in parser.items(section):
                if key not in HP_TYPES:
                    raise ConfigError(f"[grid] unknown hyperparameter {key!r}")
                grid[key] = tuple(_hp_value(key, v) for v in _list(value))
            cfg.grid = grid
            continue
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            attr, conv = SCHEMA[section][key]
            try:
                parsed = conv(value)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
            if attr.startswith("hp."):
                hp_changes[attr[3:]] = parsed
            else:
                setattr(cfg, attr, parsed)
    try:
        cfg.hp = cfg.hp.replace(**hp_changes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not 0 < cfg.split_ratio < 1:
        raise ConfigError("split_ratio must lie strictly between 0 and 1")
    return cfg


def default_config_text() -> str:
    """A config file spelling out every default."""
    d = RunConfig()
    hp = d.hp
    return f"""[data]
input = {d.input}
top_n = {d.top_n}
excluded_sectors = {", ".join(d.excluded_sectors)}
split_ratio = {d.split_ratio}

[model]
kind = {d.kind.value}
kinds = {", ".join(k.value for k in d.kinds)}
hidden_neurons = {hp.hidden_neurons}
hidden_layers = {hp.hidden_layers}
activation = {hp.activation.value}
learning_rate = {hp.learning_rate}
epochs = {hp.epochs}
batch_size = {hp.batch_size}

[grid]
hidden_layers = 1, 2, 3
hidden_neurons = 40, 50, 60

[run]
seed = {hp.seed}
out = {d.out}
workers = {d.workers}

[synth]
companies = {d.synth_companies}
quarters = {d.synth_quarters}
"""

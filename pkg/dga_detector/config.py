"""
Pipeline configuration.

Values come from, in increasing priority: dataclass defaults, a flat
``key = value`` config file, ``DGA_<KEY>`` environment variables (a ``.env`` file
is loaded by the CLI), and explicit command-line flags.

Example config file::

    # desk-scale run
    epochs = 20
    hidden_size = 64
    seed = 7
    reference_date = 2018-06-01
"""

import os
from dataclasses import dataclass, field, fields, replace
from datetime import date
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values

from .charlm import TrainConfig
from .errors import ConfigError
from .logging_setup import get_logger
from .sidefeatures import DEFAULT_WHITENING_EPSILON
from .stacker import StackerConfig

logger = get_logger("config")

ENV_PREFIX = "DGA_"


@dataclass(frozen=True)
class EvalConfig:
    clean_holdout_fraction: float = 0.2
    fpr_max: float = 0.01
    reference_date: Optional[date] = None

    def __post_init__(self):
        if not 0.0 < self.clean_holdout_fraction < 1.0:
            raise ConfigError("clean_holdout_fraction must be in (0, 1)")
        if not 0.0 < self.fpr_max <= 1.0:
            raise ConfigError("fpr_max must be in (0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    stacker: StackerConfig = field(default_factory=StackerConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    whitening_epsilon: float = DEFAULT_WHITENING_EPSILON

    def __post_init__(self):
        if self.whitening_epsilon < 0:
            raise ConfigError("whitening_epsilon must be non-negative")

    @property
    def seed(self) -> int:
        return self.train.seed

    def with_reference_date(self, reference_date: Optional[date]) -> "PipelineConfig":
        if reference_date is None:
            return self
        return replace(self, evaluation=replace(self.evaluation, reference_date=reference_date))


def parse_date(value: str) -> date:
    try:
        return date.fromisoformat(value.strip())
    except ValueError:
        raise ConfigError(f"invalid date {value!r}, expected YYYY-MM-DD") from None


# config key -> (section, field name, converter)
_KEYS: Dict[str, Tuple[str, str, Callable[[str], object]]] = {
    "whitening_epsilon": ("pipeline", "whitening_epsilon", float),
    "lr_learning_rate": ("stacker", "learning_rate", float),
    "lr_max_iterations": ("stacker", "max_iterations", int),
    "lr_tol": ("stacker", "tol", float),
    "lr_l2_lambda": ("stacker", "l2_lambda", float),
    "lr_class_weight": ("stacker", "class_weight", lambda v: v.strip().lower()),
    "clean_holdout_fraction": ("evaluation", "clean_holdout_fraction", float),
    "fpr_max": ("evaluation", "fpr_max", float),
    "reference_date": ("evaluation", "reference_date", parse_date),
}
for _field in fields(TrainConfig):
    _KEYS[_field.name] = ("train", _field.name, int if _field.type is int else float)

CONFIG_KEYS = tuple(sorted(_KEYS))


def _read_file(path: Union[str, Path]) -> Dict[str, str]:
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = dotenv_values(path)
    values = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in _KEYS:
            raise ConfigError(f"{path}: unknown config key {key!r}")
        if value is None or value.strip() == "":
            raise ConfigError(f"{path}: config key {key!r} has no value")
        values[name] = value
    return values


def _read_environment(environ: Mapping[str, str]) -> Dict[str, str]:
    values = {}
    for name in _KEYS:
        value = environ.get(f"{ENV_PREFIX}{name.upper()}")
        if value:
            values[name] = value
    return values


def build_config(values: Mapping[str, str]) -> PipelineConfig:
    """Typed PipelineConfig from raw string values keyed by config key."""
    sections: Dict[str, Dict[str, object]] = {
        "train": {},
        "stacker": {},
        "evaluation": {},
        "pipeline": {},
    }
    for name, value in values.items():
        if name not in _KEYS:
            raise ConfigError(f"unknown config key {name!r}")
        section, attr, convert = _KEYS[name]
        try:
            sections[section][attr] = convert(value)
        except ValueError:
            raise ConfigError(f"invalid value {value!r} for {name}") from None

    return PipelineConfig(
        train=TrainConfig(**sections["train"]),
        stacker=StackerConfig(**sections["stacker"]),
        evaluation=EvalConfig(**sections["evaluation"]),
        **sections["pipeline"],
    )


def load_config(
    path: Optional[Union[str, Path]] = None, environ: Optional[Mapping[str, str]] = None
) -> PipelineConfig:
    """Merge defaults, the optional config file and ``DGA_*`` environment variables."""
    environ = os.environ if environ is None else environ
    values: Dict[str, str] = {}
    if path is not None:
        values.update(_read_file(path))
        logger.info(f"Loaded {len(values)} config values from {path}")
    env_values = _read_environment(environ)
    if env_values:
        logger.info(f"Environment overrides: {', '.join(sorted(env_values))}")
    values.update(env_values)
    return build_config(values)

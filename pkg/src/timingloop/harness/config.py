"""Experiment configuration: a flat JSON document of scalar and list fields."""
from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field, fields

from ..control import ErrorBehavior

ABSTRACT = "abstract"
FULL = "full"

SEED_ENV = "TIMINGLOOP_SEED"

# keys a config file must spell out; everything else falls back to the defaults
REQUIRED_FIELDS = ("mode", "a", "K", "L", "mean_d", "capacity_bits", "eta",
                   "horizon", "runs", "seed")


class ConfigError(ValueError):
    pass


def default_seed() -> int:
    value = os.environ.get(SEED_ENV)
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV}={value!r} is not an integer") from None


@dataclass
class ExperimentConfig:
    """Parameters of the closed-loop and estimation experiments.

    Defaults reproduce the discrete-time numerical example: ``a = 1.2``,
    ``E(D) = 2`` steps, ``eta = 0.09``, ``K = 0.4`` and success meaning
    ``|X[250]| <= 0.05``. Capacities in abstract mode are in bits per step.
    ``mean_s`` and ``rate_nats`` drive the full-coding mode and the
    estimation experiment, where ``E(D) = e * mean_s``.
    """

    mode: str = ABSTRACT
    a: float = 1.2
    b: float = 1.0
    K: float = 0.4
    L: float = 1.0
    mean_d: float = 2.0
    capacity_bits: float = 1.2 * math.log2(1.2)
    eta: float = 0.09
    horizon: int = 250
    success_threshold: float = 0.05
    success_step: int = 250
    runs: int = 500
    seed: int = field(default_factory=default_seed)
    error_behavior: str = ErrorBehavior.OPEN_LOOP.value
    gamma: float = 1.1
    hold_input: bool = False
    divergence_factor: float = 1e9
    mean_s: float = 1.0
    rate_nats: float = 0.8 / math.e
    max_bits: int = 16
    trials: int = 1000
    n_grid: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6, 7])
    epsilons: list = field(default_factory=lambda: [0.1])
    workers: int = 1

    def __post_init__(self):
        self.validate()

    @property
    def behavior(self) -> ErrorBehavior:
        return ErrorBehavior(self.error_behavior)

    def validate(self) -> None:
        if self.mode not in (ABSTRACT, FULL):
            raise ConfigError(f"mode: expected 'abstract' or 'full', got {self.mode!r}")
        try:
            ErrorBehavior(self.error_behavior)
        except ValueError:
            options = ", ".join(b.value for b in ErrorBehavior)
            raise ConfigError(f"error_behavior: expected one of {options}") from None
        checks = [
            ("a", self.a >= 0), ("L", self.L > 0), ("mean_d", self.mean_d >= 1),
            ("capacity_bits", self.capacity_bits >= 0), ("eta", self.eta >= 0),
            ("horizon", self.horizon >= 1), ("success_step", self.success_step >= 0),
            ("runs", self.runs >= 1), ("seed", self.seed >= 0), ("gamma", self.gamma >= 1),
            ("divergence_factor", self.divergence_factor > 1), ("mean_s", self.mean_s > 0),
            ("rate_nats", self.rate_nats > 0), ("max_bits", self.max_bits >= 1),
            ("trials", self.trials >= 1), ("workers", self.workers >= 1),
            ("n_grid", len(self.n_grid) > 0 and all(int(n) == n and n >= 1 for n in self.n_grid)),
            ("epsilons", len(self.epsilons) > 0 and all(e > 0 for e in self.epsilons)),
        ]
        for name, ok in checks:
            if not ok:
                raise ConfigError(f"{name}: invalid value {getattr(self, name)!r}")
        if self.success_step > self.horizon:
            raise ConfigError(f"success_step: {self.success_step} exceeds horizon {self.horizon}")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def coerce_field(name: str, value):
    """Convert ``value`` to the declared type of ``name``; raises ConfigError."""
    if name not in _FIELD_TYPES:
        raise ConfigError(f"{name}: unknown field")
    kind = _FIELD_TYPES[name]
    try:
        if kind == "bool":
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0"):
                    raise ValueError(value)
                return value.lower() in ("true", "1")
            return bool(value)
        if kind == "int":
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "list":
            if isinstance(value, str):
                value = [v for v in value.split(",") if v.strip()]
            cast = int if name == "n_grid" else float
            return [cast(v) for v in value]
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {kind}") from None


def config_from_dict(data: dict, require: bool = True) -> ExperimentConfig:
    if require:
        missing = [k for k in REQUIRED_FIELDS if k not in data]
        if missing:
            raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    values = {k: coerce_field(k, v) for k, v in data.items()}
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object of key/value pairs")
    return config_from_dict(data)


def save_config(config: ExperimentConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")

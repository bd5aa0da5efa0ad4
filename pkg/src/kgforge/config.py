"""Experiment configuration with a canonical JSON form.

The JSON document produced by :meth:`ExperimentConfig.to_json` is the
exact ``configuration.json`` exported into experiment bundles: sorted
lower_snake_case keys, two-space indent, trailing newline, numbers in
their shortest round-trip representation. Parsing that document back
yields an equal config (lossless round trip).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from kgforge.errors import ConfigError
from kgforge.losses import LOSS_NAMES, LossSpec
from kgforge.models import get_model, is_registered, model_names

FILTER_SETTINGS = ("raw", "filtered", "both")
MAX_SEED = 2 ** 64 - 1


def _require(condition: bool, message: str):
    if not condition:
        raise ConfigError(message)


def check_positive_int(name: str, value) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1,
             f"{name} must be a positive integer, got {value!r}")
    return value


def check_positive_real(name: str, value) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0,
             f"{name} must be a positive number, got {value!r}")
    return float(value)


def check_nonnegative_real(name: str, value) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool) and value >= 0,
             f"{name} must be a non-negative number, got {value!r}")
    return float(value)


def check_ratio(name: str, value) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool) and 0 < value < 1,
             f"{name} must be strictly between 0 and 1, got {value!r}")
    return float(value)


def check_seed(name: str, value) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool) and 0 <= value <= MAX_SEED,
             f"{name} must be an unsigned 64-bit integer, got {value!r}")
    return value


def check_model_name(value) -> str:
    _require(isinstance(value, str) and is_registered(value),
             f"unknown model {value!r}; registered models: {model_names()}")
    return value


def check_loss(value) -> str:
    _require(value in LOSS_NAMES, f"loss must be one of {LOSS_NAMES}, got {value!r}")
    return value


def check_filter_setting(value) -> str:
    _require(value in FILTER_SETTINGS,
             f"filter_setting must be one of {FILTER_SETTINGS}, got {value!r}")
    return value


def check_eval_ks(value) -> tuple[int, ...]:
    _require(isinstance(value, (list, tuple)) and len(value) > 0,
             f"eval_ks must be a non-empty list of positive integers, got {value!r}")
    for k in value:
        check_positive_int("eval_ks entry", k)
    return tuple(value)


def check_device(value) -> str:
    # accepted for config compatibility; only CPU execution exists
    _require(value == "cpu", f"device must be 'cpu', got {value!r}")
    return value


def check_model_specific(model_name: str, value) -> dict:
    _require(isinstance(value, dict), f"model_specific must be a mapping, got {value!r}")
    allowed = get_model(model_name).config_keys
    for key, entry in value.items():
        _require(key in allowed,
                 f"model_specific key {key!r} not understood by {model_name!r}; "
                 f"allowed: {allowed or '(none)'}")
        if key == "scoring_norm":
            _require(entry in (1, 2), f"scoring_norm must be 1 or 2, got {entry!r}")
        else:
            check_positive_int(f"model_specific.{key}", entry)
    return dict(value)


def check_metadata(value) -> dict:
    _require(isinstance(value, dict) and all(
        isinstance(k, str) and isinstance(v, str) for k, v in value.items()),
        f"metadata must map strings to strings, got {value!r}")
    return dict(value)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one training/evaluation run."""

    model_name: str
    embedding_dim: int
    learning_rate: float = 0.01
    margin: float = 1.0
    loss: str | None = None          # None resolves to the model's default
    num_epochs: int = 100
    batch_size: int = 64
    split_ratio: float = 0.8
    seed: int = 0
    eval_ks: tuple[int, ...] = (1, 3, 5, 10)
    filter_setting: str = "both"
    model_specific: dict = field(default_factory=dict)
    device: str = "cpu"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        check_model_name(self.model_name)
        check_positive_int("embedding_dim", self.embedding_dim)
        check_positive_real("learning_rate", self.learning_rate)
        object.__setattr__(self, "margin", check_nonnegative_real("margin", self.margin))
        if self.loss is None:
            object.__setattr__(self, "loss", get_model(self.model_name).default_loss)
        check_loss(self.loss)
        check_positive_int("num_epochs", self.num_epochs)
        check_positive_int("batch_size", self.batch_size)
        object.__setattr__(self, "split_ratio", check_ratio("split_ratio", self.split_ratio))
        check_seed("seed", self.seed)
        object.__setattr__(self, "eval_ks", check_eval_ks(self.eval_ks))
        check_filter_setting(self.filter_setting)
        object.__setattr__(self, "model_specific",
                           check_model_specific(self.model_name, self.model_specific))
        check_device(self.device)
        object.__setattr__(self, "metadata", check_metadata(self.metadata))
        object.__setattr__(self, "learning_rate", float(self.learning_rate))

    def dims(self) -> dict[str, int]:
        """Shape-defining dims resolved against per-model defaults."""
        return get_model(self.model_name).resolved_dims(self.embedding_dim, self.model_specific)

    def loss_spec(self) -> LossSpec:
        return LossSpec(self.loss, self.margin)

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "embedding_dim": self.embedding_dim,
            "learning_rate": self.learning_rate,
            "margin": self.margin,
            "loss": self.loss,
            "num_epochs": self.num_epochs,
            "batch_size": self.batch_size,
            "split_ratio": self.split_ratio,
            "seed": self.seed,
            "eval_ks": list(self.eval_ks),
            "filter_setting": self.filter_setting,
            "model_specific": dict(self.model_specific),
            "device": self.device,
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"configuration must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        for required in ("model_name", "embedding_dim"):
            if required not in data:
                raise ConfigError(f"configuration is missing required key {required!r}")
        kwargs = dict(data)
        if "eval_ks" in kwargs:
            kwargs["eval_ks"] = tuple(kwargs["eval_ks"])
        return cls(**kwargs)

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def canonical_json(data) -> str:
    """Deterministic JSON used for every exported artifact."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

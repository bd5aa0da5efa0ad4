"""Random-search hyper-parameter optimization over finite candidate sets.

A :class:`SearchSpace` gives, for each configuration field, a non-empty
finite set of candidate values (singletons allowed). Each trial samples
every field independently and uniformly, trains on an internal sub-split
of the provided training triples, and scores the held-out validation part.
Trials whose training diverges are recorded as failed and skipped when the
best trial is selected; ties are broken by lowest trial index.

A search strategy is defined by exactly two replaceable behaviours:
proposing the next configuration and running the overall search
(:class:`SearchStrategy`). :class:`RandomSearch` is the built-in strategy.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, fields

from kgforge.config import (
    ExperimentConfig,
    check_eval_ks,
    check_filter_setting,
    check_loss,
    check_model_name,
    check_nonnegative_real,
    check_positive_int,
    check_positive_real,
    check_ratio,
    check_seed,
)
from kgforge.errors import ConfigError, HPOError, TrainingDivergedError
from kgforge.evaluation import RankMetrics, evaluate
from kgforge.graph import IndexedKG, split
from kgforge.models import get_model
from kgforge.rng import trial_rng
from kgforge.training import train

logger = logging.getLogger(__name__)

VALIDATION_RATIO = 0.9  # sub-train share of the training triples

HITS_AT_K = "hits_at_k"
MEAN_RANK_FILTERED = "mean_rank_filtered"


@dataclass(frozen=True)
class SelectionMetric:
    """What a trial is judged by: filtered hits@k (max) or filtered mean rank (min)."""

    kind: str = HITS_AT_K
    k: int = 10

    def __post_init__(self):
        if self.kind not in (HITS_AT_K, MEAN_RANK_FILTERED):
            raise ConfigError(f"selection metric must be {HITS_AT_K!r} or "
                              f"{MEAN_RANK_FILTERED!r}, got {self.kind!r}")
        check_positive_int("selection metric k", self.k)

    @property
    def maximize(self) -> bool:
        return self.kind == HITS_AT_K

    def value(self, metrics: RankMetrics) -> float:
        if self.kind == HITS_AT_K:
            return metrics.hits_at_k_filtered[self.k]
        return metrics.mean_rank_filtered

    def is_better(self, candidate: float, incumbent: float) -> bool:
        return candidate > incumbent if self.maximize else candidate < incumbent

    def to_dict(self) -> dict:
        if self.kind == HITS_AT_K:
            return {"metric": self.kind, "k": self.k}
        return {"metric": self.kind}

    @classmethod
    def from_dict(cls, data) -> "SelectionMetric":
        if not isinstance(data, dict) or "metric" not in data:
            raise ConfigError(f"selection_metric must be an object with a 'metric' key, got {data!r}")
        extra = set(data) - {"metric", "k"}
        if extra:
            raise ConfigError(f"unknown selection_metric keys: {sorted(extra)}")
        return cls(kind=data["metric"], k=data.get("k", 10))


def _as_candidates(name, value, element_check) -> tuple:
    """Normalize a JSON/py value into a validated candidate tuple."""
    candidates = value if isinstance(value, (list, tuple)) else [value]
    if len(candidates) == 0:
        raise ConfigError(f"candidate set for {name!r} is empty")
    return tuple(element_check(v) for v in candidates)


def _check_loss_or_default(value):
    if value is None:
        return None
    return check_loss(value)


@dataclass(frozen=True)
class SearchSpace:
    """Finite candidate sets for every experiment hyper-parameter."""

    model_name: tuple[str, ...]
    embedding_dim: tuple[int, ...]
    learning_rate: tuple[float, ...] = (0.01,)
    margin: tuple[float, ...] = (1.0,)
    loss: tuple = (None,)
    num_epochs: tuple[int, ...] = (100,)
    batch_size: tuple[int, ...] = (64,)
    split_ratio: tuple[float, ...] = (0.8,)
    seed: tuple[int, ...] = (0,)
    eval_ks: tuple[tuple[int, ...], ...] = ((1, 3, 5, 10),)
    filter_setting: tuple[str, ...] = ("both",)
    model_specific: dict[str, tuple] = field(default_factory=dict)
    trials: int = 10
    selection_metric: SelectionMetric = field(default_factory=SelectionMetric)

    def __post_init__(self):
        coerce = {
            "model_name": check_model_name,
            "embedding_dim": lambda v: check_positive_int("embedding_dim", v),
            "learning_rate": lambda v: check_positive_real("learning_rate", v),
            "margin": lambda v: check_nonnegative_real("margin", v),
            "loss": _check_loss_or_default,
            "num_epochs": lambda v: check_positive_int("num_epochs", v),
            "batch_size": lambda v: check_positive_int("batch_size", v),
            "split_ratio": lambda v: check_ratio("split_ratio", v),
            "seed": lambda v: check_seed("seed", v),
            "eval_ks": check_eval_ks,
            "filter_setting": check_filter_setting,
        }
        for name, check in coerce.items():
            object.__setattr__(self, name, _as_candidates(name, getattr(self, name), check))
        normalized = {}
        for key, values in self.model_specific.items():
            normalized[key] = _as_candidates(
                f"model_specific.{key}", values,
                lambda v, key=key: (v if key == "scoring_norm" and v in (1, 2)
                                    else check_positive_int(f"model_specific.{key}", v)))
        object.__setattr__(self, "model_specific", normalized)
        check_positive_int("trials", self.trials)

    def sample(self, rng) -> ExperimentConfig:
        """Draw each hyper-parameter independently and uniformly.

        model_specific keys bind only when the sampled model understands
        them, so mixed-model spaces always yield valid configurations.
        """
        def pick(candidates):
            return candidates[int(rng.integers(len(candidates)))]

        model_name = pick(self.model_name)
        understood = get_model(model_name).config_keys
        model_specific = {key: pick(values) for key, values in self.model_specific.items()
                          if key in understood}
        return ExperimentConfig(
            model_name=model_name,
            embedding_dim=pick(self.embedding_dim),
            learning_rate=pick(self.learning_rate),
            margin=pick(self.margin),
            loss=pick(self.loss),
            num_epochs=pick(self.num_epochs),
            batch_size=pick(self.batch_size),
            split_ratio=pick(self.split_ratio),
            seed=pick(self.seed),
            eval_ks=pick(self.eval_ks),
            filter_setting=pick(self.filter_setting),
            model_specific=model_specific,
        )

    def to_dict(self) -> dict:
        data = {
            "model_name": list(self.model_name),
            "embedding_dim": list(self.embedding_dim),
            "learning_rate": list(self.learning_rate),
            "margin": list(self.margin),
            "num_epochs": list(self.num_epochs),
            "batch_size": list(self.batch_size),
            "split_ratio": list(self.split_ratio),
            "seed": list(self.seed),
            "eval_ks": [list(ks) for ks in self.eval_ks],
            "filter_setting": list(self.filter_setting),
            "model_specific": {k: list(v) for k, v in self.model_specific.items()},
            "trials": self.trials,
            "selection_metric": self.selection_metric.to_dict(),
        }
        losses = [v for v in self.loss if v is not None]
        if losses:
            data["loss"] = losses
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SearchSpace":
        if not isinstance(data, dict):
            raise ConfigError(f"search space must be a JSON object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown search-space keys: {sorted(unknown)}")
        for required in ("model_name", "embedding_dim"):
            if required not in data:
                raise ConfigError(f"search space is missing required key {required!r}")
        kwargs = dict(data)
        if "eval_ks" in kwargs:
            kwargs["eval_ks"] = _eval_ks_candidates(kwargs["eval_ks"])
        if "selection_metric" in kwargs:
            kwargs["selection_metric"] = SelectionMetric.from_dict(kwargs["selection_metric"])
        if "model_specific" in kwargs:
            if not isinstance(kwargs["model_specific"], dict):
                raise ConfigError("model_specific must be a mapping of candidate lists")
        return cls(**kwargs)


def _eval_ks_candidates(value):
    """One flat list means a single candidate; a list of lists means many."""
    if isinstance(value, (list, tuple)) and value and all(
            isinstance(v, (list, tuple)) for v in value):
        return tuple(tuple(v) for v in value)
    return (tuple(value),) if isinstance(value, (list, tuple)) else value


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one search trial; ``metrics`` is None for failed trials."""

    trial_index: int
    config: ExperimentConfig
    metrics: RankMetrics | None
    failed: bool = False
    error: str | None = None

    def to_dict(self, metric: SelectionMetric) -> dict:
        data = {
            "trial_index": self.trial_index,
            "config": self.config.to_dict(),
            "failed": self.failed,
        }
        if self.failed:
            data["error"] = self.error
        else:
            data["selection_value"] = metric.value(self.metrics)
            data["mean_rank_raw"] = self.metrics.mean_rank_raw
            data["mean_rank_filtered"] = self.metrics.mean_rank_filtered
            data["hits_at_k_raw"] = {str(k): v for k, v in self.metrics.hits_at_k_raw.items()}
            data["hits_at_k_filtered"] = {str(k): v
                                          for k, v in self.metrics.hits_at_k_filtered.items()}
        return data


class SearchStrategy(ABC):
    """The two replaceable behaviours of a hyper-parameter optimizer."""

    @abstractmethod
    def propose(self, space: SearchSpace, rng) -> ExperimentConfig:
        """Produce the configuration for the next trial."""

    @abstractmethod
    def run(self, kg_train: IndexedKG, space: SearchSpace, seed: int
            ) -> tuple[TrialRecord, list[TrialRecord]]:
        """Execute the search; returns (best trial, all trials)."""


class RandomSearch(SearchStrategy):
    """Independent uniform sampling of every hyper-parameter per trial."""

    def propose(self, space, rng):
        return space.sample(rng)

    def run(self, kg_train, space, seed):
        sub_train, validation = split(kg_train, VALIDATION_RATIO, seed)
        known = set(kg_train.triples)
        metric = space.selection_metric

        records: list[TrialRecord] = []
        for index in range(space.trials):
            config = self.propose(space, trial_rng(seed, index))
            try:
                params, _ = train(sub_train, config)
                ks = sorted(set(config.eval_ks) | {metric.k})
                metrics = evaluate(config.model_name, params, validation.triples, known, ks)
            except TrainingDivergedError as exc:
                logger.warning("trial %d failed: %s", index, exc)
                records.append(TrialRecord(index, config, None, failed=True, error=str(exc)))
                continue
            records.append(TrialRecord(index, config, metrics))
            logger.info("trial %d: %s = %.6f", index, metric.kind, metric.value(metrics))

        best = None
        for record in records:
            if record.failed:
                continue
            if best is None or metric.is_better(metric.value(record.metrics),
                                                metric.value(best.metrics)):
                best = record
        if best is None:
            raise HPOError(f"all {space.trials} trials failed")
        return best, records


def sample_config(space: SearchSpace, rng) -> ExperimentConfig:
    """One uniform draw from the space; always a valid configuration."""
    return space.sample(rng)


def random_search(kg_train: IndexedKG, space: SearchSpace, seed: int
                  ) -> tuple[TrialRecord, list[TrialRecord]]:
    """Run the built-in random-search strategy (deterministic per seed)."""
    return RandomSearch().run(kg_train, space, seed)

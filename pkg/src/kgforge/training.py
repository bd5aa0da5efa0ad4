"""Open-world training: corruption sampling and the SGD loop.

Negatives are synthesized by corrupting the head or tail of a positive
triple (never the relation); a corrupted triple that happens to be another
true triple is still used as a negative, since absent triples are unknown
rather than false. Optimization is plain SGD over sparse gradients, with
the batch gradient taken as the mean of per-pair gradients so the
learning-rate scale is independent of batch size. The whole trajectory is
a deterministic function of (seed, data, config).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass

from kgforge.config import ExperimentConfig
from kgforge.errors import GraphError, TrainingDivergedError
from kgforge.graph import IndexedKG
from kgforge.losses import bce_loss, margin_loss  # noqa: F401  (re-exported loss ops)
from kgforge.models import ModelParams, SparseGradient, as_model
from kgforge.rng import seed_streams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingHistory:
    """Per-epoch mean pair losses plus timing for logs."""

    epoch_losses: tuple[float, ...]
    epochs_run: int
    wall_seconds: float

    def to_dict(self) -> dict:
        # wall_seconds is deliberately not serialized: exported bundles must
        # be byte-identical across reruns of the same experiment
        return {"epochs_run": self.epochs_run, "epoch_losses": list(self.epoch_losses)}

    @classmethod
    def from_dict(cls, data: dict) -> "TrainingHistory":
        return cls(tuple(data["epoch_losses"]), data["epochs_run"], 0.0)


def sample_negative(pos, num_entities: int, rng):
    """Corrupt head or tail (fair coin) with a uniformly drawn other entity."""
    if num_entities < 2:
        raise ValueError("negative sampling needs at least 2 entities")
    head, relation, tail = pos
    corrupt_head = rng.random() < 0.5
    current = head if corrupt_head else tail
    replacement = int(rng.integers(num_entities - 1))
    if replacement >= current:
        replacement += 1
    if corrupt_head:
        return (replacement, relation, tail)
    return (head, relation, replacement)


def apply_sgd_update(params: ModelParams, grad: SparseGradient, learning_rate: float):
    """One in-place SGD step over the gradient's sparse support."""
    for name, slots in grad.rows.items():
        tensor = params.tensors[name]
        for index, value in slots.items():
            tensor[index] -= learning_rate * value
    for name, value in grad.full.items():
        params.tensors[name] -= learning_rate * value


def train(kg_train: IndexedKG, config: ExperimentConfig, *, model=None
          ) -> tuple[ModelParams, TrainingHistory]:
    """Train a model on the given triples; fully deterministic per config.

    Each epoch shuffles the training triples, pairs every positive with one
    sampled negative, and applies mean-gradient SGD per batch (the last
    partial batch is kept). Norm constraints are re-applied after every
    batch or every epoch according to the model's ``constraint_stage``.
    Raises :class:`TrainingDivergedError` on a non-finite loss or
    parameter, naming the epoch and batch.
    """
    model = as_model(model if model is not None else config.model_name)
    triples = list(kg_train.triples)
    if not triples:
        raise GraphError("empty knowledge graph")

    streams = seed_streams(config.seed)
    params = model.init_params(kg_train.num_entities, kg_train.num_relations,
                               config.dims(), streams["init"])
    loss_spec = config.loss_spec()
    n = len(triples)
    epoch_losses = []
    started = time.perf_counter()

    for epoch in range(config.num_epochs):
        order = streams["shuffle"].permutation(n)
        epoch_loss_sum = 0.0
        for batch_index, start in enumerate(range(0, n, config.batch_size)):
            batch = [triples[i] for i in order[start:start + config.batch_size]]
            negatives = [sample_negative(pos, kg_train.num_entities, streams["corrupt"])
                         for pos in batch]
            mean_loss, grad = model.grad_batch(params, batch, negatives, loss_spec)
            if not math.isfinite(mean_loss):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}",
                    epoch=epoch, batch=batch_index)
            apply_sgd_update(params, grad, config.learning_rate)
            if model.constraint_stage == "batch":
                model.apply_constraints(params)
            epoch_loss_sum += mean_loss * len(batch)
        if model.constraint_stage == "epoch":
            model.apply_constraints(params)
        if not params.all_finite():
            raise TrainingDivergedError(
                f"non-finite parameter after epoch {epoch}", epoch=epoch)
        epoch_losses.append(epoch_loss_sum / n)

    wall = time.perf_counter() - started
    logger.info("trained %s for %d epochs in %.2fs (final mean loss %.6f)",
                model.name, config.num_epochs, wall,
                epoch_losses[-1] if epoch_losses else float("nan"))
    return params, TrainingHistory(tuple(epoch_losses), len(epoch_losses), wall)

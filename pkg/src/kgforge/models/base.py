"""Model interface, parameter containers, and sparse gradients.

Score convention
----------------
Every model returns a real-valued plausibility score where HIGHER means
more plausible. Distance-based models therefore return the negated
distance, so their scores are always <= 0 with equality exactly when the
translated/projected head coincides with the tail representation.
Evaluation and inference sort candidates in descending score order.

Extending with a new model
--------------------------
The training loop and evaluator only require an object that provides
``init_params``, ``grad_batch``, ``score_batch``, ``apply_constraints``
and a ``constraint_stage`` attribute, with the signatures used in
:class:`EmbeddingModel`. Subclassing :class:`EmbeddingModel` and
implementing ``score`` / ``score_gradient`` / ``init_params`` is the
shortest route; registering the instance with :func:`register_model` makes
the name usable everywhere a built-in name is (configs, CLI, bundles).
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from kgforge.errors import ModelError
from kgforge.losses import LossSpec, pair_loss_terms

logger = logging.getLogger(__name__)

# Canonical tensor-family names; also used as file stems in exported bundles.
ENTITY_EMB = "entity_embeddings"
RELATION_EMB = "relation_embeddings"
NORMAL_VECS = "normal_vectors"
PROJ_MATS = "projection_matrices"
ENTITY_PROJ = "entity_projections"
RELATION_PROJ = "relation_projections"
REL_HEAD_MATS = "relation_head_matrices"
REL_TAIL_MATS = "relation_tail_matrices"
RELATION_MATS = "relation_matrices"
HIDDEN_W = "hidden_weights"
HIDDEN_B = "hidden_bias"
OUTPUT_W = "output_weights"


@dataclass(eq=False)
class ModelParams:
    """All trainable tensors of one model instance, in float64.

    ``tensors`` maps tensor-family name to array; iteration order is the
    model's fixed manifest order, which the binary serializer relies on.
    ``dims`` records the shape-defining hyper-parameters (embedding_dim,
    relation_dim, hidden_dim, scoring_norm) needed to re-score after a
    round trip through serialization.
    """

    model_name: str
    dims: dict[str, int]
    tensors: dict[str, np.ndarray]

    def __post_init__(self):
        self.tensors = {k: np.asarray(v, dtype=np.float64) for k, v in self.tensors.items()}

    @property
    def num_entities(self) -> int:
        return self.tensors[ENTITY_EMB].shape[0]

    def copy(self) -> "ModelParams":
        return ModelParams(self.model_name, dict(self.dims),
                           {k: v.copy() for k, v in self.tensors.items()})

    def exactly_equals(self, other: "ModelParams") -> bool:
        return (self.model_name == other.model_name
                and self.dims == other.dims
                and list(self.tensors) == list(other.tensors)
                and all(self.tensors[k].shape == other.tensors[k].shape
                        and self.tensors[k].tobytes() == other.tensors[k].tobytes()
                        for k in self.tensors))

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.tensors.values())


@dataclass
class SparseGradient:
    """Gradient over exactly the parameter slices a computation touched.

    ``rows`` holds per-row pieces indexed along axis 0 of the named tensor
    (entity/relation rows, per-relation matrices); ``full`` holds
    whole-tensor pieces (the MLP weights of ERMLP). Rows untouched by the
    computation are simply absent.
    """

    rows: dict[str, dict[int, np.ndarray]] = field(default_factory=dict)
    full: dict[str, np.ndarray] = field(default_factory=dict)

    def is_empty(self) -> bool:
        return not self.rows and not self.full

    def add_row(self, name: str, index: int, value: np.ndarray, weight: float = 1.0):
        slot = self.rows.setdefault(name, {})
        if index in slot:
            slot[index] = slot[index] + weight * value
        else:
            slot[index] = weight * np.asarray(value, dtype=np.float64)

    def add_full(self, name: str, value: np.ndarray, weight: float = 1.0):
        if name in self.full:
            self.full[name] = self.full[name] + weight * value
        else:
            self.full[name] = weight * np.asarray(value, dtype=np.float64)

    def add(self, other: "SparseGradient", weight: float = 1.0):
        for name, slots in other.rows.items():
            for index, value in slots.items():
                self.add_row(name, index, value, weight)
        for name, value in other.full.items():
            self.add_full(name, value, weight)

    def scale(self, factor: float):
        for slots in self.rows.values():
            for index in slots:
                slots[index] = slots[index] * factor
        for name in self.full:
            self.full[name] = self.full[name] * factor

    def to_dense(self, params: ModelParams) -> dict[str, np.ndarray]:
        """Materialize as full-shape arrays (zeros elsewhere); test helper."""
        dense = {name: np.zeros_like(tensor) for name, tensor in params.tensors.items()}
        for name, slots in self.rows.items():
            for index, value in slots.items():
                dense[name][index] += value
        for name, value in self.full.items():
            dense[name] += value
        return dense


class EmbeddingModel(ABC):
    """One knowledge-graph embedding model.

    Instances are stateless: scoring is a pure function of ``(params,
    triple)`` and may run concurrently over shared read-only params.
    """

    name: ClassVar[str]
    # model_specific config keys the model understands
    config_keys: ClassVar[tuple[str, ...]] = ()
    default_loss: ClassVar[str] = "margin_ranking"
    # when the training loop re-applies norm constraints: "batch", "epoch", "none"
    constraint_stage: ClassVar[str] = "none"

    _DIM_DEFAULTS = {"relation_dim": None, "hidden_dim": None, "scoring_norm": 2}

    def resolved_dims(self, embedding_dim: int, model_specific: dict) -> dict[str, int]:
        dims = {"embedding_dim": int(embedding_dim)}
        for key in self.config_keys:
            default = self._DIM_DEFAULTS.get(key)
            dims[key] = int(model_specific.get(key, embedding_dim if default is None else default))
        return dims

    @abstractmethod
    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1) -> ModelParams:
        """Freshly initialized parameters; deterministic for a given rng state."""

    @abstractmethod
    def score(self, params: ModelParams, head: int, relation: int, tail: int) -> float:
        """Plausibility of one triple under the score convention."""

    @abstractmethod
    def score_gradient(self, params: ModelParams, head: int, relation: int, tail: int) -> SparseGradient:
        """d(score)/d(params) over exactly the touched parameter slices."""

    def apply_constraints(self, params: ModelParams) -> ModelParams:
        """Re-impose the model's norm constraints in place (default: none)."""
        return params

    def check_ids(self, params: ModelParams, head: int, relation: int, tail: int):
        num_entities = params.tensors[ENTITY_EMB].shape[0]
        if not (0 <= head < num_entities and 0 <= tail < num_entities):
            raise ModelError(
                f"entity ID out of range in triple ({head},{relation},{tail}): "
                f"have {num_entities} entities")
        num_relations = self._num_relations(params)
        if not 0 <= relation < num_relations:
            raise ModelError(
                f"relation ID out of range in triple ({head},{relation},{tail}): "
                f"have {num_relations} relations")

    def _num_relations(self, params: ModelParams) -> int:
        for name, tensor in params.tensors.items():
            if name != ENTITY_EMB and name not in (HIDDEN_W, HIDDEN_B, OUTPUT_W):
                return tensor.shape[0]
        return 0

    def score_batch(self, params: ModelParams, triples) -> np.ndarray:
        out = np.empty(len(triples), dtype=np.float64)
        for i, (h, r, t) in enumerate(triples):
            self.check_ids(params, h, r, t)
            out[i] = self.score(params, h, r, t)
        return out

    def pair_loss_gradient(self, params, pos, neg, loss_spec: LossSpec):
        """Loss of one positive/negative pair and its parameter gradient."""
        self.check_ids(params, *pos)
        self.check_ids(params, *neg)
        f_pos = self.score(params, *pos)
        f_neg = self.score(params, *neg)
        loss, w_pos, w_neg = pair_loss_terms(f_pos, f_neg, loss_spec)
        grad = SparseGradient()
        if w_pos != 0.0:
            grad.add(self.score_gradient(params, *pos), w_pos)
        if w_neg != 0.0:
            grad.add(self.score_gradient(params, *neg), w_neg)
        return loss, grad

    def grad_batch(self, params, positives, negatives, loss_spec: LossSpec):
        """Mean loss and mean gradient over paired positive/negative batches."""
        if len(positives) != len(negatives):
            raise ValueError("positive and negative batches must have equal length")
        total = SparseGradient()
        loss_sum = 0.0
        for pos, neg in zip(positives, negatives):
            loss, grad = self.pair_loss_gradient(params, pos, neg, loss_spec)
            loss_sum += loss
            total.add(grad)
        total.scale(1.0 / len(positives))
        return loss_sum / len(positives), total


# ---------------------------------------------------------------------------
# shared initialization / constraint helpers

def uniform_rows(rng, count: int, dim: int) -> np.ndarray:
    """Rows drawn uniformly from [-6/sqrt(dim), +6/sqrt(dim)]."""
    bound = 6.0 / np.sqrt(dim)
    return rng.uniform(-bound, bound, size=(count, dim))


def normalize_rows_once(matrix: np.ndarray) -> np.ndarray:
    """One-shot L2 row normalization used at initialization time."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def identity_plus_noise(rng, count: int, rows: int, cols: int, noise: float) -> np.ndarray:
    """Stacked (possibly rectangular) identities with uniform noise."""
    base = np.zeros((count, rows, cols))
    base[:, np.arange(min(rows, cols)), np.arange(min(rows, cols))] = 1.0
    if noise:
        base += rng.uniform(-noise, noise, size=(count, rows, cols))
    return base


def unit_normalize_rows(matrix: np.ndarray) -> int:
    """L2-normalize every nonzero row in place; returns the zero-row count.

    Iterates to a bitwise fixed point so that applying the constraint twice
    is exactly a no-op. Zero rows cannot be normalized and are left alone.
    """
    zero_count = int(np.count_nonzero(np.linalg.norm(matrix, axis=1) == 0.0))
    for _ in range(8):
        norms = np.linalg.norm(matrix, axis=1)
        mask = (norms != 0.0) & (norms != 1.0)
        if not mask.any():
            break
        updated = matrix[mask] / norms[mask, None]
        if np.array_equal(updated, matrix[mask]):
            break
        matrix[mask] = updated
    return zero_count


def project_rows_to_unit_ball(matrix: np.ndarray):
    """Scale rows with L2 norm > 1 back onto the unit sphere, in place."""
    for _ in range(8):
        norms = np.linalg.norm(matrix, axis=1)
        mask = norms > 1.0
        if not mask.any():
            break
        updated = matrix[mask] / norms[mask, None]
        if np.array_equal(updated, matrix[mask]):
            break
        matrix[mask] = updated


def warn_unnormalizable(model_name: str, tensor_name: str, count: int):
    if count:
        logger.warning("%s: %d zero rows in %s cannot be normalized, left unchanged",
                       model_name, count, tensor_name)


# ---------------------------------------------------------------------------
# model registry

_REGISTRY: dict[str, EmbeddingModel] = {}


def register_model(model: EmbeddingModel):
    if model.name in _REGISTRY:
        raise ModelError(f"model {model.name!r} is already registered")
    _REGISTRY[model.name] = model


def unregister_model(name: str):
    _REGISTRY.pop(name, None)


def get_model(name: str) -> EmbeddingModel:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ModelError(f"unknown model {name!r}; registered: {model_names()}") from None


def as_model(model) -> EmbeddingModel:
    """Resolve a model name to its registered instance; pass objects through."""
    if isinstance(model, str):
        return get_model(model)
    return model


def model_names() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def is_registered(name: str) -> bool:
    return name in _REGISTRY

"""Embedding models behind a single scoring/gradient interface.

The module-level functions below operate on registered model names; the
class-based interface lives in :mod:`kgforge.models.base`.
"""

from __future__ import annotations

import numpy as np

from kgforge.losses import LossSpec
from kgforge.models import factorization, translational  # noqa: F401  (registers models)
from kgforge.models.base import (
    ENTITY_EMB,
    RELATION_EMB,
    EmbeddingModel,
    ModelParams,
    SparseGradient,
    as_model,
    get_model,
    is_registered,
    model_names,
    register_model,
    unregister_model,
)

BUILTIN_MODEL_NAMES = ("transe", "transh", "transr", "transd", "um", "se",
                       "rescal", "distmult", "ermlp")


def init_params(model_name, num_entities, num_relations, dims, seed, matrix_noise=0.1):
    """Seed-deterministic fresh parameters for a registered model."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return get_model(model_name).init_params(num_entities, num_relations, dims, rng,
                                             matrix_noise=matrix_noise)


def score(model_name, params: ModelParams, triple) -> float:
    """Plausibility of one ID triple (higher = more plausible)."""
    model = get_model(model_name)
    h, r, t = triple
    model.check_ids(params, h, r, t)
    return model.score(params, h, r, t)


def grad_loss(model_name, params: ModelParams, pos, neg, loss_spec: LossSpec) -> SparseGradient:
    """Gradient of the pairwise loss w.r.t. the touched parameter slices."""
    _, grad = get_model(model_name).pair_loss_gradient(params, pos, neg, loss_spec)
    return grad


def apply_constraints(model_name, params: ModelParams) -> ModelParams:
    """Re-impose the model's norm constraints (idempotent, in place)."""
    return get_model(model_name).apply_constraints(params)


__all__ = [
    "BUILTIN_MODEL_NAMES",
    "ENTITY_EMB",
    "RELATION_EMB",
    "EmbeddingModel",
    "ModelParams",
    "SparseGradient",
    "apply_constraints",
    "as_model",
    "get_model",
    "grad_loss",
    "init_params",
    "is_registered",
    "model_names",
    "register_model",
    "score",
    "unregister_model",
]

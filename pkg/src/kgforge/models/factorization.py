"""Semantic matching models: RESCAL, DistMult, ERMLP."""

from __future__ import annotations

import numpy as np

from kgforge.models.base import (
    ENTITY_EMB,
    HIDDEN_B,
    HIDDEN_W,
    OUTPUT_W,
    RELATION_EMB,
    RELATION_MATS,
    EmbeddingModel,
    ModelParams,
    SparseGradient,
    identity_plus_noise,
    normalize_rows_once,
    register_model,
    uniform_rows,
)
from kgforge.models.translational import _check_entity_relation_counts


class RESCAL(EmbeddingModel):
    """Bilinear form with a full matrix per relation: score = e_h^T W_r e_t."""

    name = "rescal"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d = dims["embedding_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_MATS: identity_plus_noise(rng, num_relations, d, d, matrix_noise),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        return float(e[head] @ params.tensors[RELATION_MATS][relation] @ e[tail])

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        w = params.tensors[RELATION_MATS][relation]
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, w @ e[tail])
        grad.add_row(ENTITY_EMB, tail, w.T @ e[head])
        grad.add_row(RELATION_MATS, relation, np.outer(e[head], e[tail]))
        return grad


class DistMult(EmbeddingModel):
    """Diagonal bilinear form: score = sum_i e_h[i] * r[i] * e_t[i]."""

    name = "distmult"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d = dims["embedding_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d)),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        r = params.tensors[RELATION_EMB][relation]
        return float(np.sum(e[head] * r * e[tail]))

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        r = params.tensors[RELATION_EMB][relation]
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, r * e[tail])
        grad.add_row(RELATION_EMB, relation, e[head] * e[tail])
        grad.add_row(ENTITY_EMB, tail, e[head] * r)
        return grad


class ERMLP(EmbeddingModel):
    """One-hidden-layer MLP over the concatenated (head, relation, tail).

    score = w^T tanh(H^T [e_h; r; e_t] + b) with H of shape (3d, hidden),
    b of shape (hidden,), and w stored as an (hidden, 1) output matrix.
    """

    name = "ermlp"
    config_keys = ("hidden_dim",)
    default_loss = "binary_cross_entropy"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d, hidden = dims["embedding_dim"], dims["hidden_dim"]
        fan_in = 3 * d
        in_bound = 1.0 / np.sqrt(fan_in)
        out_bound = 1.0 / np.sqrt(hidden)
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d)),
            HIDDEN_W: rng.uniform(-in_bound, in_bound, size=(fan_in, hidden)),
            HIDDEN_B: rng.uniform(-in_bound, in_bound, size=hidden),
            OUTPUT_W: rng.uniform(-out_bound, out_bound, size=(hidden, 1)),
        })

    def _forward(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        x = np.concatenate([e[head], params.tensors[RELATION_EMB][relation], e[tail]])
        activ = np.tanh(x @ params.tensors[HIDDEN_W] + params.tensors[HIDDEN_B])
        return x, activ

    def score(self, params, head, relation, tail):
        _, activ = self._forward(params, head, relation, tail)
        return float(activ @ params.tensors[OUTPUT_W][:, 0])

    def score_gradient(self, params, head, relation, tail):
        d = params.tensors[ENTITY_EMB].shape[1]
        x, activ = self._forward(params, head, relation, tail)
        w = params.tensors[OUTPUT_W][:, 0]
        back = w * (1.0 - activ ** 2)
        grad_x = params.tensors[HIDDEN_W] @ back
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, grad_x[:d])
        grad.add_row(RELATION_EMB, relation, grad_x[d:2 * d])
        grad.add_row(ENTITY_EMB, tail, grad_x[2 * d:])
        grad.add_full(HIDDEN_W, np.outer(x, back))
        grad.add_full(HIDDEN_B, back)
        grad.add_full(OUTPUT_W, activ[:, None])
        return grad


for _model in (RESCAL(), DistMult(), ERMLP()):
    register_model(_model)

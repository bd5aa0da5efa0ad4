"""Translational distance models: TransE, TransH, TransR, TransD, UM, SE.

All return negated distances (higher = more plausible). TransE and SE use
the unsquared L1 or L2 norm selected by the ``scoring_norm`` dimension;
TransH, TransR, TransD and UM use the squared L2 norm, whose gradients are
smooth everywhere. The L1 subgradient at zero coordinates is taken as 0.
"""

from __future__ import annotations

import numpy as np

from kgforge.models.base import (
    ENTITY_EMB,
    ENTITY_PROJ,
    NORMAL_VECS,
    PROJ_MATS,
    REL_HEAD_MATS,
    REL_TAIL_MATS,
    RELATION_EMB,
    RELATION_PROJ,
    EmbeddingModel,
    ModelParams,
    SparseGradient,
    identity_plus_noise,
    normalize_rows_once,
    project_rows_to_unit_ball,
    register_model,
    uniform_rows,
    unit_normalize_rows,
    warn_unnormalizable,
)
from kgforge.errors import ModelError


def _norm(x: np.ndarray, p: int) -> float:
    if p == 1:
        return float(np.abs(x).sum())
    return float(np.linalg.norm(x))


def _norm_gradient(x: np.ndarray, p: int) -> np.ndarray:
    """d||x||_p / dx with subgradient 0 at non-differentiable points."""
    if p == 1:
        return np.sign(x)
    n = np.linalg.norm(x)
    if n == 0.0:
        return np.zeros_like(x)
    return x / n


def _check_entity_relation_counts(num_entities: int, num_relations: int):
    if num_entities < 1 or num_relations < 1:
        raise ModelError(
            f"need at least one entity and one relation, got {num_entities}/{num_relations}")


def _pad_to(x: np.ndarray, size: int) -> np.ndarray:
    """Rectangular-identity map between entity and relation spaces."""
    if x.shape[0] == size:
        return x
    if x.shape[0] > size:
        return x[:size]
    out = np.zeros(size, dtype=x.dtype)
    out[: x.shape[0]] = x
    return out


class TransE(EmbeddingModel):
    """Relations as translations: score = -||e_h + r - e_t||_p."""

    name = "transe"
    config_keys = ("scoring_norm",)
    constraint_stage = "batch"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d = dims["embedding_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d)),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        x = e[head] + params.tensors[RELATION_EMB][relation] - e[tail]
        return -_norm(x, params.dims.get("scoring_norm", 2))

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        x = e[head] + params.tensors[RELATION_EMB][relation] - e[tail]
        u = _norm_gradient(x, params.dims.get("scoring_norm", 2))
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -u)
        grad.add_row(RELATION_EMB, relation, -u)
        grad.add_row(ENTITY_EMB, tail, u)
        return grad

    def apply_constraints(self, params):
        zeros = unit_normalize_rows(params.tensors[ENTITY_EMB])
        warn_unnormalizable(self.name, ENTITY_EMB, zeros)
        return params


class UnstructuredModel(EmbeddingModel):
    """Relation-free baseline: score = -||e_h - e_t||_2^2."""

    name = "um"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        # no relation tensors, so the valid relation-ID range is kept in dims
        return ModelParams(self.name, {**dims, "num_relations": num_relations}, {
            ENTITY_EMB: uniform_rows(rng, num_entities, dims["embedding_dim"]),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        delta = e[head] - e[tail]
        return -float(delta @ delta)

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        delta = e[head] - e[tail]
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -2.0 * delta)
        grad.add_row(ENTITY_EMB, tail, 2.0 * delta)
        return grad

    def _num_relations(self, params):
        # no relation tensors; ID range is recorded in dims by the trainer
        return params.dims.get("num_relations", 0)


class StructuredEmbedding(EmbeddingModel):
    """Per-relation head/tail transforms: score = -||M1 e_h - M2 e_t||_p."""

    name = "se"
    config_keys = ("scoring_norm",)

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d = dims["embedding_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            REL_HEAD_MATS: identity_plus_noise(rng, num_relations, d, d, matrix_noise),
            REL_TAIL_MATS: identity_plus_noise(rng, num_relations, d, d, matrix_noise),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        x = (params.tensors[REL_HEAD_MATS][relation] @ e[head]
             - params.tensors[REL_TAIL_MATS][relation] @ e[tail])
        return -_norm(x, params.dims.get("scoring_norm", 2))

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        m1 = params.tensors[REL_HEAD_MATS][relation]
        m2 = params.tensors[REL_TAIL_MATS][relation]
        x = m1 @ e[head] - m2 @ e[tail]
        u = _norm_gradient(x, params.dims.get("scoring_norm", 2))
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -(m1.T @ u))
        grad.add_row(ENTITY_EMB, tail, m2.T @ u)
        grad.add_row(REL_HEAD_MATS, relation, -np.outer(u, e[head]))
        grad.add_row(REL_TAIL_MATS, relation, np.outer(u, e[tail]))
        return grad


class TransH(EmbeddingModel):
    """Translation on a relation-specific hyperplane.

    score = -||proj(e_h) + d_r - proj(e_t)||_2^2 with
    proj(e) = e - (w . e) w for the relation's unit normal w.
    """

    name = "transh"
    constraint_stage = "batch"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d = dims["embedding_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d)),
            NORMAL_VECS: normalize_rows_once(uniform_rows(rng, num_relations, d)),
        })

    def _residual(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        w = params.tensors[NORMAL_VECS][relation]
        delta = e[head] - e[tail]
        return delta - (w @ delta) * w + params.tensors[RELATION_EMB][relation], w, delta

    def score(self, params, head, relation, tail):
        x, _, _ = self._residual(params, head, relation, tail)
        return -float(x @ x)

    def score_gradient(self, params, head, relation, tail):
        x, w, delta = self._residual(params, head, relation, tail)
        tangent = 2.0 * (x - (w @ x) * w)
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -tangent)
        grad.add_row(ENTITY_EMB, tail, tangent)
        grad.add_row(RELATION_EMB, relation, -2.0 * x)
        grad.add_row(NORMAL_VECS, relation, 2.0 * ((x @ w) * delta + (w @ delta) * x))
        return grad

    def apply_constraints(self, params):
        zeros = unit_normalize_rows(params.tensors[NORMAL_VECS])
        warn_unnormalizable(self.name, NORMAL_VECS, zeros)
        return params


class TransR(EmbeddingModel):
    """Translation in a relation-specific space: score = -||M_r e_h + r - M_r e_t||_2^2."""

    name = "transr"
    config_keys = ("relation_dim",)
    constraint_stage = "epoch"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d, d_r = dims["embedding_dim"], dims["relation_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d_r)),
            PROJ_MATS: identity_plus_noise(rng, num_relations, d_r, d, matrix_noise),
        })

    def score(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        m = params.tensors[PROJ_MATS][relation]
        x = m @ (e[head] - e[tail]) + params.tensors[RELATION_EMB][relation]
        return -float(x @ x)

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        m = params.tensors[PROJ_MATS][relation]
        delta = e[head] - e[tail]
        x = m @ delta + params.tensors[RELATION_EMB][relation]
        back = 2.0 * (m.T @ x)
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -back)
        grad.add_row(ENTITY_EMB, tail, back)
        grad.add_row(RELATION_EMB, relation, -2.0 * x)
        grad.add_row(PROJ_MATS, relation, -2.0 * np.outer(x, delta))
        return grad

    def apply_constraints(self, params):
        project_rows_to_unit_ball(params.tensors[ENTITY_EMB])
        project_rows_to_unit_ball(params.tensors[RELATION_EMB])
        return params


class TransD(EmbeddingModel):
    """Dynamic projection via head/tail projection vectors.

    score = -||(I + r_p h_p^T) e_h + r - (I + r_p t_p^T) e_t||_2^2 where I
    is the rectangular identity between entity and relation spaces. With
    zero projection vectors and equal dims this degenerates to the squared
    TransE-L2 score.
    """

    name = "transd"
    config_keys = ("relation_dim",)
    constraint_stage = "epoch"

    def init_params(self, num_entities, num_relations, dims, rng, matrix_noise=0.1):
        _check_entity_relation_counts(num_entities, num_relations)
        d, d_r = dims["embedding_dim"], dims["relation_dim"]
        return ModelParams(self.name, dict(dims), {
            ENTITY_EMB: uniform_rows(rng, num_entities, d),
            RELATION_EMB: normalize_rows_once(uniform_rows(rng, num_relations, d_r)),
            ENTITY_PROJ: uniform_rows(rng, num_entities, d),
            RELATION_PROJ: uniform_rows(rng, num_relations, d_r),
        })

    def _parts(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        d_r = params.tensors[RELATION_EMB].shape[1]
        h_p = params.tensors[ENTITY_PROJ][head]
        t_p = params.tensors[ENTITY_PROJ][tail]
        r_p = params.tensors[RELATION_PROJ][relation]
        head_proj = _pad_to(e[head], d_r) + (h_p @ e[head]) * r_p
        tail_proj = _pad_to(e[tail], d_r) + (t_p @ e[tail]) * r_p
        x = head_proj + params.tensors[RELATION_EMB][relation] - tail_proj
        return x, h_p, t_p, r_p

    def score(self, params, head, relation, tail):
        x, _, _, _ = self._parts(params, head, relation, tail)
        return -float(x @ x)

    def score_gradient(self, params, head, relation, tail):
        e = params.tensors[ENTITY_EMB]
        d = e.shape[1]
        x, h_p, t_p, r_p = self._parts(params, head, relation, tail)
        x_entity = _pad_to(x, d)
        x_dot_rp = x @ r_p
        grad = SparseGradient()
        grad.add_row(ENTITY_EMB, head, -2.0 * (x_entity + x_dot_rp * h_p))
        grad.add_row(ENTITY_EMB, tail, 2.0 * (x_entity + x_dot_rp * t_p))
        grad.add_row(RELATION_EMB, relation, -2.0 * x)
        grad.add_row(ENTITY_PROJ, head, -2.0 * x_dot_rp * e[head])
        grad.add_row(ENTITY_PROJ, tail, 2.0 * x_dot_rp * e[tail])
        grad.add_row(RELATION_PROJ, relation,
                     -2.0 * ((h_p @ e[head]) - (t_p @ e[tail])) * x)
        return grad

    def apply_constraints(self, params):
        project_rows_to_unit_ball(params.tensors[ENTITY_EMB])
        project_rows_to_unit_ball(params.tensors[RELATION_EMB])
        return params


for _model in (TransE(), TransH(), TransR(), TransD(), UnstructuredModel(), StructuredEmbedding()):
    register_model(_model)

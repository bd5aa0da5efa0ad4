"""Rank-based link-prediction evaluation: mean rank and hits@k.

For every test triple, all candidate triples obtained by substituting each
entity on one side are scored and the true triple's rank is computed in
two settings: *raw* (against all candidates) and *filtered* (candidates
that are known true triples, other than the true triple itself, are
removed first). Only entities are ever substituted, never relations.

Tie handling is "realistic": rank = 1 + (#strictly better) + (#equal
others)/2, the average of the optimistic and pessimistic ranks. This is
deterministic and penalizes constant-score models; note that it changes
reported numbers relative to optimistic-rank implementations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kgforge.errors import GraphError
from kgforge.models import ENTITY_EMB, as_model

HEAD_SIDE = "head"
TAIL_SIDE = "tail"


@dataclass(frozen=True)
class TripleRank:
    """Rank of one test triple on one corruption side."""

    head: int
    relation: int
    tail: int
    side: str
    raw_rank: float
    filtered_rank: float

    def to_dict(self) -> dict:
        return {"head": self.head, "relation": self.relation, "tail": self.tail,
                "side": self.side, "raw_rank": self.raw_rank,
                "filtered_rank": self.filtered_rank}

    @classmethod
    def from_dict(cls, data: dict) -> "TripleRank":
        return cls(data["head"], data["relation"], data["tail"], data["side"],
                   data["raw_rank"], data["filtered_rank"])


@dataclass(frozen=True)
class RankMetrics:
    """Mean rank and hits@k, raw and filtered, plus the per-triple ranks."""

    mean_rank_raw: float
    mean_rank_filtered: float
    hits_at_k_raw: dict[int, float]
    hits_at_k_filtered: dict[int, float]
    per_triple_ranks: tuple[TripleRank, ...]

    def to_dict(self) -> dict:
        return {
            "mean_rank_raw": self.mean_rank_raw,
            "mean_rank_filtered": self.mean_rank_filtered,
            "hits_at_k_raw": {str(k): v for k, v in self.hits_at_k_raw.items()},
            "hits_at_k_filtered": {str(k): v for k, v in self.hits_at_k_filtered.items()},
            "per_triple_ranks": [r.to_dict() for r in self.per_triple_ranks],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RankMetrics":
        return cls(
            data["mean_rank_raw"],
            data["mean_rank_filtered"],
            {int(k): v for k, v in data["hits_at_k_raw"].items()},
            {int(k): v for k, v in data["hits_at_k_filtered"].items()},
            tuple(TripleRank.from_dict(r) for r in data["per_triple_ranks"]),
        )


def _realistic_rank(scores: np.ndarray, true_position: int, keep: np.ndarray) -> float:
    true_score = scores[true_position]
    kept = scores[keep]
    better = int(np.count_nonzero(kept > true_score))
    ties_other = int(np.count_nonzero(kept == true_score)) - 1  # the true candidate itself
    return 1.0 + better + 0.5 * ties_other


def rank_one(model, params, triple, side: str, num_entities: int, filter_set
             ) -> tuple[float, float]:
    """Raw and filtered realistic rank of ``triple`` on one side.

    ``filter_set`` holds the known true triples; candidates found in it are
    removed in the filtered setting, except the true triple itself.
    """
    model = as_model(model)
    head, relation, tail = triple
    if side == HEAD_SIDE:
        candidates = [(e, relation, tail) for e in range(num_entities)]
        true_position = head
    elif side == TAIL_SIDE:
        candidates = [(head, relation, e) for e in range(num_entities)]
        true_position = tail
    else:
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")

    scores = model.score_batch(params, candidates)
    keep_all = np.ones(num_entities, dtype=bool)
    raw = _realistic_rank(scores, true_position, keep_all)

    keep = np.array([i == true_position or candidates[i] not in filter_set
                     for i in range(num_entities)])
    filtered = _realistic_rank(scores, true_position, keep)
    return raw, filtered


def evaluate(model, params, test_triples, known, ks) -> RankMetrics:
    """Pooled head- and tail-side ranks over all test triples.

    ``known`` is the filter set (train and test triples together, plus any
    validation triples when present). Means and hits pool all 2*|test|
    ranks directly. Results preserve test order and are deterministic.
    """
    model = as_model(model)
    test_triples = list(test_triples)
    if not test_triples:
        raise GraphError("empty test set")
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError(f"hits@k cutoffs must be positive, got {ks}")
    known = frozenset(tuple(t) for t in known)
    num_entities = params.tensors[ENTITY_EMB].shape[0]

    entries = []
    for triple in test_triples:
        for side in (HEAD_SIDE, TAIL_SIDE):
            raw, filtered = rank_one(model, params, triple, side, num_entities, known)
            entries.append(TripleRank(*triple, side=side, raw_rank=raw, filtered_rank=filtered))

    raw_ranks = np.array([e.raw_rank for e in entries])
    filtered_ranks = np.array([e.filtered_rank for e in entries])
    return RankMetrics(
        mean_rank_raw=float(raw_ranks.mean()),
        mean_rank_filtered=float(filtered_ranks.mean()),
        hits_at_k_raw={k: float(np.mean(raw_ranks <= k)) for k in ks},
        hits_at_k_filtered={k: float(np.mean(filtered_ranks <= k)) for k in ks},
        per_triple_ranks=tuple(entries),
    )

"""Input validation helpers for the estimator and label-based entry points."""

from __future__ import annotations

import numpy as np

from kgforge.graph import IndexedKG, Triple, as_triple


def as_label_triples(X) -> list[Triple]:
    """Coerce array-likes of shape (n, 3) or sequences of 3-tuples to Triples."""
    if isinstance(X, np.ndarray):
        if X.ndim != 2 or X.shape[1] != 3:
            raise ValueError(f"expected an array of shape (n, 3), got {X.shape}")
        X = X.tolist()
    try:
        triples = [as_triple(row) for row in X]
    except (TypeError, ValueError) as exc:
        raise ValueError(f"expected triples of (head, relation, tail) labels: {exc}") from None
    return triples


def as_entity_labels(X) -> list[str]:
    if isinstance(X, np.ndarray):
        if X.ndim != 1:
            raise ValueError(f"expected a 1-D array of entity labels, got shape {X.shape}")
        X = X.tolist()
    labels = list(X)
    for label in labels:
        if not isinstance(label, str) or not label:
            raise ValueError(f"entity labels must be non-empty strings, got {label!r}")
    return labels


def triples_to_ids(kg: IndexedKG, triples, what: str = "triple") -> list[tuple[int, int, int]]:
    """Map label triples to ID triples, naming any unknown label."""
    out = []
    for position, triple in enumerate(triples):
        head, relation, tail = triple
        for label, mapping, kind in ((head, kg.entity_to_id, "entity"),
                                     (relation, kg.relation_to_id, "relation"),
                                     (tail, kg.entity_to_id, "entity")):
            if label not in mapping:
                raise KeyError(f"{what} {position}: unknown {kind} label {label!r}")
        out.append((kg.entity_to_id[head], kg.relation_to_id[relation], kg.entity_to_id[tail]))
    return out

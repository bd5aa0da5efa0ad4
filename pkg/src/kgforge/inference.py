"""Post-training prediction: direct scoring and the ranked candidate workflow.

The candidate workflow enumerates every (head, relation, tail) combination
over user-chosen entity and relation sets, optionally drops reflexive
triples (head == tail) and an explicit exclusion set (typically the
training triples), scores the rest, and writes a TSV ranked with the most
plausible triples first.
"""

from __future__ import annotations

from kgforge.errors import ModelError
from kgforge.fileio import atomic_write_text
from kgforge.models import ENTITY_EMB, as_model


def predict(model, params, triples) -> list[float]:
    """Scores positionally aligned with the input triples."""
    model = as_model(model)
    num_entities = params.tensors[ENTITY_EMB].shape[0]
    triples = [tuple(t) for t in triples]
    for position, (h, r, t) in enumerate(triples):
        try:
            model.check_ids(params, h, r, t)
        except ModelError as exc:
            raise ModelError(f"triple at position {position}: {exc}") from None
    return [float(s) for s in model.score_batch(params, triples)] if triples else []


def enumerate_candidates(entities, relations, exclude=frozenset(),
                         exclude_reflexive=False) -> list[tuple[int, int, int]]:
    """All (h, r, t) combinations in lexicographic ID order, minus exclusions."""
    entities = sorted(set(entities))
    relations = sorted(set(relations))
    if not entities or not relations:
        raise ValueError("entity and relation sets must be non-empty")
    exclude = {tuple(t) for t in exclude}
    return [
        (h, r, t)
        for h in entities
        for r in relations
        for t in entities
        if not (exclude_reflexive and h == t) and (h, r, t) not in exclude
    ]


def rank_candidates(model, params, candidates) -> list[tuple[tuple[int, int, int], float]]:
    """Candidates sorted by descending score; ties in lexicographic ID order."""
    model = as_model(model)
    candidates = [tuple(t) for t in candidates]
    if not candidates:
        return []
    scores = model.score_batch(params, candidates)
    paired = list(zip(candidates, (float(s) for s in scores)))
    paired.sort(key=lambda item: (-item[1], item[0]))
    return paired


def write_predictions(path, ranked):
    """Ranked label triples as TSV: head, relation, tail, score (6 sig. digits)."""
    lines = []
    for (head, relation, tail), score in ranked:
        lines.append(f"{head}\t{relation}\t{tail}\t{score:.6g}\n")
    atomic_write_text(path, "".join(lines))


def write_triples(path, triples):
    """Plain three-column TSV of label triples (inverse of the TSV reader)."""
    lines = [f"{head}\t{relation}\t{tail}\n" for head, relation, tail in triples]
    atomic_write_text(path, "".join(lines))

"""Core knowledge-graph types: label triples, integer indexing, splitting.

All types are immutable after construction and safe to share across
threads; the operations below are pure functions of their inputs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from kgforge.errors import GraphError, SplitError
from kgforge.rng import make_rng

logger = logging.getLogger(__name__)

IdTriple = tuple[int, int, int]


@dataclass(frozen=True)
class Triple:
    """A labelled fact: (head entity, relation, tail entity)."""

    head: str
    relation: str
    tail: str

    def __post_init__(self):
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValueError(f"triple {name} must be a non-empty string, got {value!r}")

    def __iter__(self):
        yield self.head
        yield self.relation
        yield self.tail


def as_triple(value) -> Triple:
    """Coerce a Triple or 3-sequence of labels into a Triple."""
    if isinstance(value, Triple):
        return value
    items = tuple(value)
    if len(items) != 3:
        raise ValueError(f"expected 3 labels per triple, got {len(items)}")
    return Triple(*items)


@dataclass
class IndexedKG:
    """An integer-indexed knowledge graph.

    ``entity_to_id`` and ``relation_to_id`` are bijections onto the dense
    ID ranges ``0..num_entities-1`` and ``0..num_relations-1``. ``triples``
    holds deduplicated ``(head_id, relation_id, tail_id)`` tuples. Views
    produced by :func:`split` share the dictionaries and differ only in
    their triple list. Instances are treated as immutable.
    """

    entity_to_id: dict[str, int]
    relation_to_id: dict[str, int]
    triples: tuple[IdTriple, ...]
    num_entities: int = field(init=False)
    num_relations: int = field(init=False)

    def __post_init__(self):
        self.triples = tuple(tuple(t) for t in self.triples)
        self.num_entities = len(self.entity_to_id)
        self.num_relations = len(self.relation_to_id)
        if sorted(self.entity_to_id.values()) != list(range(self.num_entities)):
            raise GraphError("entity IDs are not a dense 0..n-1 range")
        if sorted(self.relation_to_id.values()) != list(range(self.num_relations)):
            raise GraphError("relation IDs are not a dense 0..n-1 range")
        if len(set(self.triples)) != len(self.triples):
            raise GraphError("indexed triple list contains duplicates")
        for h, r, t in self.triples:
            if not (0 <= h < self.num_entities and 0 <= t < self.num_entities):
                raise GraphError(f"triple ({h},{r},{t}) has an out-of-range entity ID")
            if not 0 <= r < self.num_relations:
                raise GraphError(f"triple ({h},{r},{t}) has an out-of-range relation ID")
        self._id_to_entity = {i: label for label, i in self.entity_to_id.items()}
        self._id_to_relation = {i: label for label, i in self.relation_to_id.items()}

    @property
    def triple_set(self) -> frozenset[IdTriple]:
        return frozenset(self.triples)

    def entity_label(self, entity_id: int) -> str:
        return self._id_to_entity[entity_id]

    def relation_label(self, relation_id: int) -> str:
        return self._id_to_relation[relation_id]

    def label_triple(self, triple: IdTriple) -> tuple[str, str, str]:
        h, r, t = triple
        return (self._id_to_entity[h], self._id_to_relation[r], self._id_to_entity[t])

    def with_triples(self, triples) -> "IndexedKG":
        """A view over the same dictionaries with a different triple list."""
        return IndexedKG(self.entity_to_id, self.relation_to_id, tuple(triples))


def build_index(triples) -> IndexedKG:
    """Index label triples into an :class:`IndexedKG`.

    IDs are assigned in lexicographic order of the labels, so the index is
    independent of input order. Exact duplicate triples are removed (with a
    logged count); the indexed triple list is emitted in sorted ID order
    for the same reason.
    """
    triples = [as_triple(t) for t in triples]
    if not triples:
        raise GraphError("empty knowledge graph")

    entities = sorted({t.head for t in triples} | {t.tail for t in triples})
    relations = sorted({t.relation for t in triples})
    entity_to_id = {label: i for i, label in enumerate(entities)}
    relation_to_id = {label: i for i, label in enumerate(relations)}

    indexed = sorted({
        (entity_to_id[t.head], relation_to_id[t.relation], entity_to_id[t.tail])
        for t in triples
    })
    duplicates = len(triples) - len(indexed)
    if duplicates:
        logger.warning("removed %d duplicate triples during indexing", duplicates)
    return IndexedKG(entity_to_id, relation_to_id, tuple(indexed))


def split(kg: IndexedKG, ratio: float, seed: int) -> tuple[IndexedKG, IndexedKG]:
    """Deterministic train/test split with coverage repair.

    The shuffled triple list is cut at ``round(ratio * n)``; test triples
    containing an entity or relation unseen in train are then moved to
    train in a single greedy pass so every test entity and relation also
    occurs in train (unseen items would be unrankable). Raises
    :class:`SplitError` if either side ends up empty.
    """
    if not 0.0 < ratio < 1.0:
        raise SplitError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(kg.triples)
    if n < 2:
        raise SplitError("degenerate split: need at least 2 triples")

    order = make_rng(seed).permutation(n)
    shuffled = [kg.triples[i] for i in order]
    train_size = int(math.floor(ratio * n + 0.5))
    train = shuffled[:train_size]
    test = []

    seen_entities = {h for h, _, _ in train} | {t for _, _, t in train}
    seen_relations = {r for _, r, _ in train}
    moved = 0
    for triple in shuffled[train_size:]:
        h, r, t = triple
        if h in seen_entities and t in seen_entities and r in seen_relations:
            test.append(triple)
        else:
            train.append(triple)
            seen_entities.update((h, t))
            seen_relations.add(r)
            moved += 1
    if moved:
        logger.info("coverage repair moved %d triples from test to train", moved)

    if not train or not test:
        raise SplitError(
            f"degenerate split: ratio {ratio} on {n} triples left "
            f"{len(train)} train / {len(test)} test"
        )
    return kg.with_triples(train), kg.with_triples(test)

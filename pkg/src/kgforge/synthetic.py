"""Seeded synthetic benchmark graph with learnable group structure.

The generator builds a graph of ``num_groups * group_size`` entities split
into latent groups, with one relation per block pattern connecting a
source group to a target group. The default pattern uses four relations
over four groups of ten (40 entities, ~400 triples):

* ``r0``: group 0 -> group 1  and  group 2 -> group 3
* ``r1``: group 1 -> group 0  and  group 3 -> group 2
* ``r2``: group 0 -> group 2  and  group 1 -> group 3
* ``r3``: group 2 -> group 0  and  group 3 -> group 1

The block pairs are chosen so that a single translation vector per
relation is globally consistent (the group centroids can sit on a
parallelogram), which makes the structure learnable by translation-based
models while still requiring real generalization: for every (relation,
head) slice only ``tails_per_head`` of the ``group_size`` possible tails
are sampled, so link prediction must complete unseen block entries.

Entity labels are zero-padded (``e00`` .. ``e39``) so lexicographic
indexing keeps groups contiguous; entity ``e<i>`` belongs to group
``i // group_size``.
"""

from __future__ import annotations

from kgforge.graph import Triple
from kgforge.rng import make_rng

DEFAULT_BLOCKS = {
    "r0": ((0, 1), (2, 3)),
    "r1": ((1, 0), (3, 2)),
    "r2": ((0, 2), (1, 3)),
    "r3": ((2, 0), (3, 1)),
}


def group_structured_kg(num_groups: int = 4, group_size: int = 10,
                        tails_per_head: int = 5, seed: int = 0,
                        blocks: dict | None = None) -> list[Triple]:
    """Generate the benchmark triples; deterministic for a fixed seed."""
    if blocks is None:
        if num_groups != 4:
            raise ValueError("the default block pattern requires num_groups=4")
        blocks = DEFAULT_BLOCKS
    if not 1 <= tails_per_head <= group_size:
        raise ValueError(f"tails_per_head must be in 1..{group_size}")

    rng = make_rng(seed)
    width = len(str(num_groups * group_size - 1))

    def entity(group: int, member: int) -> str:
        return f"e{group * group_size + member:0{width}d}"

    triples = []
    for relation in sorted(blocks):
        for src_group, dst_group in blocks[relation]:
            for member in range(group_size):
                head = entity(src_group, member)
                tails = rng.choice(group_size, size=tails_per_head, replace=False)
                for tail_member in sorted(int(m) for m in tails):
                    triples.append(Triple(head, relation, entity(dst_group, tail_member)))
    return triples

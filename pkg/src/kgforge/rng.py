"""Deterministic random-number streams.

All stochastic behaviour in the package flows through numpy's PCG64
generator seeded from a ``SeedSequence``. A single experiment seed is split
into named, independent streams so that adding draws to one stream (say,
corruption) never perturbs another (say, shuffling):

* stream 0 — parameter initialization
* stream 1 — per-epoch shuffling of training triples
* stream 2 — negative sampling (corruption)

Per-trial streams in hyper-parameter search are derived from the search
seed with ``spawn_key=(trial_index,)``, numpy's documented stream-splitting
mechanism.
"""

from __future__ import annotations

import numpy as np

STREAM_NAMES = ("init", "shuffle", "corrupt")


def seed_streams(seed: int) -> dict[str, np.random.Generator]:
    """Split one experiment seed into the named independent streams."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    return {name: np.random.default_rng(child) for name, child in zip(STREAM_NAMES, children)}


def make_rng(seed: int) -> np.random.Generator:
    """A single PCG64 generator for operations that need only one stream."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent per-trial generator derived from a search seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial_index,)))

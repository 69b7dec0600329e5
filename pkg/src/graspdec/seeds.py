"""Deterministic RNG substream derivation.

Every randomized stage derives its generator from a base seed plus a
structural key (e.g. ``("augment", trial_id, variant)``), so results do
not depend on iteration order and are reproducible bit-for-bit.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream", "spawn_key"]


def spawn_key(*key: int | str) -> tuple[int, ...]:
    """Map a mixed int/str key to the integer tuple SeedSequence expects."""
    out = []
    for part in key:
        if isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        else:
            out.append(int(part) & 0xFFFFFFFF)
    return tuple(out)


def substream(base_seed: int, *key: int | str) -> np.random.Generator:
    """Return a generator for the substream identified by ``key``.

    Identical (base_seed, key) pairs always yield identical streams;
    distinct keys yield statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=spawn_key(*key))
    return np.random.Generator(np.random.PCG64(ss))

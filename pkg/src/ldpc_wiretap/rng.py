"""Seeded random streams.

Every random draw comes from numpy's PCG64 seeded through a ``SeedSequence``
whose ``spawn_key`` names the stream: ``stream(seed, 3)`` is layer 3 of an
ensemble sample, ``stream(seed, 1, 17)`` is trial 17 of a Monte Carlo loop.
Streams are stable across runs and machines for a fixed numpy major version.
"""

from __future__ import annotations

import numpy as np

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed: int, *key: int) -> int:
    """A 64-bit seed derived from ``seed`` and a counter key."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])

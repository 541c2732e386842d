"""Seeded, splittable random streams.

Every random quantity in the package is drawn from a Philox (counter-based)
generator keyed by a master seed plus an integer spawn path, so a trial can be
regenerated in isolation from ``(master_seed, *keys)`` alone.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator, np.random.SeedSequence, None]


def make_rng(seed: SeedLike = 0, *keys: int) -> np.random.Generator:
    """Return a Philox generator for ``seed`` along the spawn path ``keys``.

    A ``Generator`` passed in is returned untouched (keys must then be empty),
    which lets callers thread an existing stream through helper functions.
    """
    if isinstance(seed, np.random.Generator):
        if keys:
            raise ValueError("cannot derive a keyed stream from a live Generator")
        return seed
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(keys))
    else:
        ss = np.random.SeedSequence(0 if seed is None else int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(master_seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the stream ``(master_seed, *keys)``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))

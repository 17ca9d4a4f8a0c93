"""Deterministic, splittable random streams keyed by experiment indices."""
from __future__ import annotations

from typing import Iterable

import numpy as np

SIGNAL_STREAM = 0
SUPPORT_STREAM = 1


def make_rng(seed: int | np.random.SeedSequence | None) -> np.random.Generator:
    """Return a PCG64 generator for a plain seed or an existing SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def substream(master_seed: int, keys: Iterable[int]) -> np.random.Generator:
    """Independent stream for (master_seed, *keys); identical keys give identical draws."""
    spawn_key = tuple(int(key) for key in keys)
    if any(key < 0 for key in spawn_key):
        raise ValueError(f"Substream keys must be non-negative, got {spawn_key}")
    return make_rng(np.random.SeedSequence(int(master_seed), spawn_key=spawn_key))

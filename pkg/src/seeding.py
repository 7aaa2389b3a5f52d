"""Splittable counter-based random streams.

Each consumer asks for a generator keyed by (seed, *keys); the same key always
yields the same stream regardless of which thread or in which order it is
requested.
"""

from __future__ import annotations

import numpy as np


SEED_MASK = (1 << 64) - 1

# Stream families, used as the first spawn key.
STREAM_GIBBS = 1
STREAM_DIAGNOSTICS = 2
STREAM_NOISE = 3
STREAM_DESIGN = 4


def normalize_seed(seed: int) -> int:
    return int(seed) & SEED_MASK


def make_generator(seed: int, *keys: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(normalize_seed(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))

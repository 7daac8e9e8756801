"""
Random streams.

Every stochastic operation takes an explicit 64-bit seed. Generators are
numpy ``Philox`` (counter-based) instances; independent streams are derived
with ``SeedSequence.spawn`` so that stream ``i`` of a seed is the same no
matter how many workers consume the streams.
"""
from typing import List

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` (reduced modulo 2**64)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & SEED_MASK)))


def split_seeds(seed: int, count: int) -> List[int]:
    """
    Derive ``count`` child seeds from ``seed``.

    Child ``i`` depends only on ``(seed, i)``.
    """
    children = np.random.SeedSequence(int(seed) & SEED_MASK).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def child_seed(seed: int, *path: int) -> int:
    """Seed addressed by a path of indices below ``seed``; e.g. ``child_seed(s, n, rep)``."""
    sequence = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(p) for p in path))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])

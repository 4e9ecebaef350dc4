"""Seeded randomness: one construction rule for every consumer.

All random draws in the library flow through PCG64 generators built from a
64-bit seed via ``SeedSequence``, so a seed fully determines every result.
Block decomposition uses ``spawn`` so that worker count and scheduling
cannot change the streams.
"""

from __future__ import annotations

import numpy as np

__all__ = ["generator", "block_sequences"]


def generator(seed: int) -> np.random.Generator:
    """A PCG64 generator deterministically derived from ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def block_sequences(seed: int, n_blocks: int) -> list[np.random.SeedSequence]:
    """Independent per-block seed sequences derived from one root seed."""
    return np.random.SeedSequence(seed).spawn(n_blocks)

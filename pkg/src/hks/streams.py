"""Deterministic RNG streams keyed by (master seed, task key).

Replicates are grouped into fixed-size blocks, and each block gets its
own stream.  Results depend only on the seed and the block size, never on
how many workers process the blocks or in what order.
"""

from __future__ import annotations

import zlib

import numpy as np

BLOCK = 256


def _key_part(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode())
    return int(k)


def stream(seed: int, *key) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_part(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(seed: int, total: int, *key, size: int = BLOCK):
    """Yield ``(start, stop, rng)`` covering ``range(total)``."""
    for b, start in enumerate(range(0, total, size)):
        yield start, min(start + size, total), stream(seed, *key, b)

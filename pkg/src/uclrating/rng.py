"""Seed plumbing.

Every random stream in the package is derived from a single 64-bit integer
seed.  Streams are split with :class:`numpy.random.SeedSequence` using a
*path* of labels, so ``generator(7, "draw")`` and ``generator(7, "league", 3)``
are independent, reproducible, and do not depend on the order in which they
are requested.  String labels are mapped to integers with CRC-32, which is
stable across interpreter runs (unlike ``hash``).
"""

from __future__ import annotations

import random
import zlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def _label(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"negative spawn key {part}")
    return int(part)


def seed_sequence(seed: int, *path: int | str) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed & SEED_MASK, spawn_key=tuple(_label(p) for p in path))


def generator(seed: int, *path: int | str) -> np.random.Generator:
    """Independent numpy generator for ``path`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *path)))


def py_random(seed: int, *path: int | str) -> random.Random:
    """Stdlib generator for tight scalar loops (cheaper per call than numpy)."""
    state = seed_sequence(seed, *path).generate_state(2, dtype=np.uint64)
    return random.Random(int(state[0]) << 64 | int(state[1]))

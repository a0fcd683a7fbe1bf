"""Seed handling: one 64-bit master seed, deterministic named sub-streams."""

from __future__ import annotations

import zlib

import numpy as np

DEFAULT_SEED = 20080101
_SEED_MASK = (1 << 64) - 1


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode())


def substream(seed: int, *path) -> np.random.Generator:
    """Generator for ``path`` under ``seed``; equal inputs give equal streams.

    >>> substream(1, "otp").random() == substream(1, "otp").random()
    True
    """
    if not 0 <= int(seed) <= _SEED_MASK:
        raise ValueError(f"seed {seed} is not a 64-bit unsigned integer")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))

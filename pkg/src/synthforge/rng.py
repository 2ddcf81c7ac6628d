"""Counter-based deterministic random streams.

Every random draw in the pipeline comes from a stream keyed by
``(seed, index, tag)``.  The key is hashed into a Philox key, so streams
are independent of draw order, worker count, and platform: replaying the
same key always reproduces the same values bit-for-bit.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "uniform", "randint"]


def _philox_key(seed: int, index: int, tag: str) -> np.ndarray:
    payload = f"{seed}:{index}:{tag}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=16).digest()
    return np.frombuffer(digest, dtype=np.uint64)


def stream(seed: int, index: int, tag: str) -> np.random.Generator:
    """Independent generator for one (seed, index, tag) triple."""
    return np.random.Generator(np.random.Philox(key=_philox_key(seed, index, tag)))


def uniform(seed: int, index: int, tag: str, lo: float, hi: float, size=None):
    return stream(seed, index, tag).uniform(lo, hi, size=size)


def randint(seed: int, index: int, tag: str, lo: int, hi: int, size=None):
    """Integers in [lo, hi] inclusive."""
    return stream(seed, index, tag).integers(lo, hi, size=size, endpoint=True)

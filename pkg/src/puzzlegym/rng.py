"""Deterministic seed derivation.

Every random decision in the package flows from one 64-bit root seed.
Child streams are derived by hashing (seed, *path) with blake2b, so any
instance can be regenerated independently of the others and generation
order never changes results.
"""

from __future__ import annotations

import hashlib
import random

MASK64 = (1 << 64) - 1


def child_seed(seed: int, *path: object) -> int:
    """Derive a 64-bit child seed from a root seed and a key path."""
    h = hashlib.blake2b(digest_size=8)
    h.update((seed & MASK64).to_bytes(8, "little"))
    for part in path:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def child_rng(seed: int, *path: object) -> random.Random:
    """A random.Random seeded from child_seed(seed, *path)."""
    return random.Random(child_seed(seed, *path))

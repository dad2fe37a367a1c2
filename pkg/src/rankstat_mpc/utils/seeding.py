"""
Seed derivation utilities for reproducible multi-actor runs.
"""

import hashlib
import random


def derive_seed_bytes(seed: int, label: str, length: int = 32) -> bytes:
    """SHA-256 of (seed, label), truncated or extended to length bytes."""
    base = f"{seed}:{label}".encode()
    out = b""
    counter = 0
    while len(out) < length:
        out += hashlib.sha256(base + counter.to_bytes(4, "big")).digest()
        counter += 1
    return out[:length]


def derive_rng(seed: int, label: str) -> random.Random:
    """Independent Random stream for one actor of a seeded run."""
    return random.Random(int.from_bytes(derive_seed_bytes(seed, label), "big"))

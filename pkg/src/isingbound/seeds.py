"""Deterministic child-seed derivation.

A child seed is a stable 64-bit hash of (master seed, label, index), so every
replica or trial owns an independent stream that does not depend on how the
work is scheduled.
"""

import hashlib
import secrets

import numpy as np


def child_seed(master: int, label: str, index: int = 0) -> int:
    key = f"{int(master)}|{label}|{int(index)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def child_rng(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, label, index))


def fresh_seed() -> int:
    """A new master seed; callers must record it before use."""
    return secrets.randbits(63)

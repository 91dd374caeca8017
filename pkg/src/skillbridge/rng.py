"""Deterministic, name-splittable random streams.

Every source of randomness in the project is a numpy Generator derived
from a root seed plus a stream name, so any component can be re-run in
isolation and reproduce exactly what it did inside a larger run.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_seed(root_seed: int, name: str) -> int:
    """Derive a 64-bit child seed from a root seed and a stream name."""
    digest = hashlib.sha256(f"{root_seed}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(root_seed: int, name: str) -> np.random.Generator:
    """Independent PCG64 generator for the named stream."""
    return np.random.Generator(np.random.PCG64(stream_seed(root_seed, name)))

"""Seed derivation and stream construction.

Every stage of the pipeline draws from its own child stream derived by
hashing (parent_seed, label), so inserting a stage never shifts the
streams of later stages and results are identical across platforms.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def child_seed(parent: int, *labels) -> int:
    """Derive a 64-bit child seed from a parent seed and stage labels."""
    key = str(int(parent) & _MASK64) + "".join(f":{l}" for l in labels)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, *labels) -> np.random.Generator:
    """PCG64 generator for the (seed, labels) stream."""
    if labels:
        seed = child_seed(seed, *labels)
    return np.random.Generator(np.random.PCG64(seed & _MASK64))

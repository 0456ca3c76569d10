"""Canonical JSON serialization, content hashing, and run-length coding.

Scene files must be byte-identical across runs and platforms, so all
serialization goes through one canonical dumper: sorted keys, compact
separators, no NaN, floats written with Python's shortest round-trip repr.
"""

import hashlib
import json

import numpy as np


def _plain(obj):
    """Convert numpy scalars/arrays to plain Python containers."""
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def canonical_dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_bytes(obj) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def content_hash(obj) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def rle_encode(values) -> list:
    """Run-length encode a flat sequence as [value, run, value, run, ...]."""
    out = []
    arr = np.asarray(values).ravel()
    if arr.size == 0:
        return out
    changes = np.flatnonzero(np.diff(arr)) + 1
    starts = np.concatenate(([0], changes))
    ends = np.concatenate((changes, [arr.size]))
    for s, e in zip(starts, ends):
        out.append(int(arr[s]))
        out.append(int(e - s))
    return out


def rle_decode(pairs, dtype=np.uint8) -> np.ndarray:
    vals = np.asarray(pairs[0::2], dtype=dtype)
    runs = np.asarray(pairs[1::2], dtype=np.int64)
    return np.repeat(vals, runs)

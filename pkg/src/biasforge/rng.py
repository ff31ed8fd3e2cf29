"""Deterministic per-utterance random streams.

Every stochastic operation in the toolkit draws from a generator derived by
hashing (global seed, purpose label, utterance id). Streams are therefore
independent of iteration order and worker count, which is what makes
`--jobs N` byte-reproducible.
"""
from __future__ import annotations

import hashlib

import numpy as np


def derive_rng(seed: int, *keys: str) -> np.random.Generator:
    """Return a Generator keyed on the global seed plus string labels."""
    h = hashlib.blake2b(digest_size=16)
    h.update(str(int(seed)).encode("utf-8"))
    for key in keys:
        h.update(b"\x00")
        h.update(key.encode("utf-8"))
    return np.random.default_rng(int.from_bytes(h.digest(), "big"))

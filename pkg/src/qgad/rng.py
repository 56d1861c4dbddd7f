"""Seedable, order-independent random streams.

Each (seed, *path) pair gets its own counter-based Philox generator, so the
draws for one estimated element never depend on how many draws another
element consumed.  The key is derived by hashing, which keeps streams stable
across processes and platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, *path) -> np.random.Generator:
    """Return an independent generator for the given seed and path tags."""
    tag = ":".join([str(int(seed))] + [str(p) for p in path]).encode()
    digest = hashlib.sha256(tag).digest()
    key = np.array(
        [
            int.from_bytes(digest[0:8], "little"),
            int.from_bytes(digest[8:16], "little"),
        ],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))

"""Keyed random streams.

Every random draw in the package comes from a stream identified by
``(master seed, purpose tag, *integer keys)`` -- typically the sample
size and the replicate index.  Streams are Philox (counter based)
generators seeded through :class:`numpy.random.SeedSequence`, so two
different keys give statistically independent output and the same key
always reproduces the same draws, no matter in which order or on which
thread the work items run.
"""

from __future__ import annotations

import zlib

import numpy as np


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str, *keys: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(tag_id(tag), *(int(k) for k in keys)))
    return np.random.Generator(np.random.Philox(ss))

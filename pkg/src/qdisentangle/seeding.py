"""Named, independent random streams derived from one global seed."""
from __future__ import annotations

import zlib

import numpy as np


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def stream(seed: int, name: str) -> np.random.Generator:
    """Counter-based (Philox) generator for component ``name``.

    Streams for different names never share state, so adding draws in one
    component does not shift another.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream_key(name),))
    return np.random.Generator(np.random.Philox(ss))


def child_seed(seed: int, name: str) -> int:
    """A plain integer seed for APIs that take one."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream_key(name),))
    return int(ss.generate_state(1, dtype=np.uint32)[0])

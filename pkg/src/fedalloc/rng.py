"""Named random streams.

Every stream is keyed by ``(seed, device_index, purpose)`` so the numbers a
device or a method sees do not depend on the order in which work is
scheduled. ``device_index=None`` denotes a scenario-wide stream.
"""

import zlib

import numpy as np


def _tag(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str, device_index: int | None = None) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    slot = 0 if device_index is None else device_index + 1
    ss = np.random.SeedSequence([int(seed), slot, _tag(purpose)])
    return np.random.Generator(np.random.PCG64(ss))

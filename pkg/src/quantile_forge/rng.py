"""Reproducible uniform streams.

Each :class:`RngStream` is a Philox4x64-10 counter-based generator keyed by
``(seed, stream_id)``.  Streams with different keys are statistically
independent, and a stream's output depends only on its key and how many
values were drawn before, never on other streams or on thread scheduling.

A raw 64-bit word ``w`` becomes the uniform ``((w >> 12) + 0.5) * 2**-52``,
which lies strictly inside (0, 1).
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["RngStream", "stable_hash64"]

_MASK64 = (1 << 64) - 1
_INV_2_52 = 2.0**-52


def stable_hash64(*parts) -> int:
    """Platform-independent 64-bit hash of the ``repr`` of ``parts``."""
    text = "\x1f".join(repr(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "little")


class RngStream:
    def __init__(self, seed: int, stream_id: int = 0):
        if not 0 <= seed <= _MASK64 or not 0 <= stream_id <= _MASK64:
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._bitgen = np.random.Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))
        self.counter = 0

    def raw(self, count: int) -> np.ndarray:
        """Next ``count`` raw 64-bit words."""
        out = self._bitgen.random_raw(count)
        self.counter += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        """Next ``count`` doubles, uniform on the open interval (0, 1)."""
        words = self.raw(count)
        return ((words >> np.uint64(12)).astype(np.float64) + 0.5) * _INV_2_52

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

"""Counter-based random streams.

All randomness in the package flows from a single 64-bit root seed through
named substreams.  A substream is identified by the root seed plus a tuple of
labels (strings or integers); the pair is hashed into a Philox key, so streams
are independent, reproducible, and cheap to derive in any order.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream_key", "substream"]


def _encode(label) -> bytes:
    if isinstance(label, (int, np.integer)):
        return b"i" + int(label).to_bytes(8, "little", signed=True)
    if isinstance(label, str):
        return b"s" + label.encode("utf-8")
    raise TypeError(f"stream labels must be str or int, got {type(label).__name__}")


def stream_key(seed: int, *labels) -> np.ndarray:
    """Derive a 128-bit Philox key from a root seed and a label path."""
    h = hashlib.blake2b(digest_size=16, key=(int(seed) & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"))
    for label in labels:
        piece = _encode(label)
        h.update(len(piece).to_bytes(2, "little"))
        h.update(piece)
    return np.frombuffer(h.digest(), dtype=np.uint64).copy()


def substream(seed: int, *labels) -> np.random.Generator:
    """Fresh generator for the named substream. Same (seed, labels) -> same bits."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *labels)))

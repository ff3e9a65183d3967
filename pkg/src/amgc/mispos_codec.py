"""Mismatch-position vectors coded bit by bit with an error-count context.

The context of bit i is the number of mismatches among the ten bits before
it inside the same vector (0..10).  The window restarts at every vector.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .coder import RangeDecoder, RangeEncoder, binary_contexts

WINDOW = 10
N_CONTEXTS = WINDOW + 1


def window_sums(bits: Sequence[int] | np.ndarray, window: int = WINDOW) -> np.ndarray:
    """Context of every position: popcount of the previous ``window`` bits (zero padded)."""
    x = np.asarray(bits, dtype=np.int64)
    c = np.concatenate(([0], np.cumsum(x)))
    i = np.arange(x.size)
    return c[i] - c[np.maximum(i - window, 0)]


def encode_mispos(vectors: Iterable[Sequence[int] | np.ndarray]) -> bytes:
    enc = RangeEncoder()
    ctx = binary_contexts(N_CONTEXTS)
    for vec in vectors:
        bits = np.asarray(vec, dtype=np.uint8).tolist()
        s = 0
        for i, b in enumerate(bits):
            enc.encode_bit(ctx[s], b)
            s += b
            if i >= WINDOW:
                s -= bits[i - WINDOW]
    return enc.finish()


def decode_mispos(data: bytes, lengths: Iterable[int]) -> list[np.ndarray]:
    dec = RangeDecoder(data)
    ctx = binary_contexts(N_CONTEXTS)
    out = []
    for n in lengths:
        bits = [0] * n
        s = 0
        for i in range(n):
            b = dec.decode_bit(ctx[s])
            bits[i] = b
            s += b
            if i >= WINDOW:
                s -= bits[i - WINDOW]
        out.append(np.array(bits, dtype=bool))
    return out


def encode_order0(vectors: Iterable[Sequence[int] | np.ndarray]) -> bytes:
    """Single-context baseline."""
    enc = RangeEncoder()
    ctx = binary_contexts(1)[0]
    for vec in vectors:
        for b in np.asarray(vec, dtype=np.uint8).tolist():
            enc.encode_bit(ctx, b)
    return enc.finish()


def encode_position_context(vectors: Iterable[Sequence[int] | np.ndarray], max_len: int = 1024) -> bytes:
    """Baseline with one context per read position index."""
    enc = RangeEncoder()
    ctx = binary_contexts(max_len)
    for vec in vectors:
        for i, b in enumerate(np.asarray(vec, dtype=np.uint8).tolist()):
            enc.encode_bit(ctx[min(i, max_len - 1)], b)
    return enc.finish()

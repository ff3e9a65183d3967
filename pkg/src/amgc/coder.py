"""Adaptive range coder shared by every stream codec.

The coder keeps a 32-bit range with byte-wise renormalisation and propagates
carries through a one-byte cache (the usual LZMA-style layout).  Probability
models are plain counter objects passed in at each call, so one coder can
interleave any number of contexts; the decoder must be driven with an
identically initialised set of contexts in the same order.
"""
from __future__ import annotations

from bisect import bisect_right
from itertools import accumulate

from .errors import TruncatedStreamError, CorruptStreamError

RESCALE_BOUND = 1 << 13

_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF


class BinaryContext:
    """Adaptive bit model: p(1) = (n1 + 1) / (n0 + n1 + 2)."""

    __slots__ = ("n0", "n1")

    def __init__(self) -> None:
        self.n0 = 0
        self.n1 = 0

    @property
    def p1(self) -> float:
        return (self.n1 + 1) / (self.n0 + self.n1 + 2)

    def update(self, bit: int) -> None:
        if bit:
            self.n1 += 1
        else:
            self.n0 += 1
        if self.n0 + self.n1 >= RESCALE_BOUND:
            self.n0 >>= 1
            self.n1 >>= 1

    def __repr__(self) -> str:
        return f"BinaryContext(n0={self.n0}, n1={self.n1})"


class SymbolContext:
    """Adaptive model over ``m`` symbols with add-one smoothing.

    ``freqs`` holds the smoothed frequencies (occurrence count + 1).
    """

    __slots__ = ("m", "freqs", "total")

    def __init__(self, m: int) -> None:
        if m < 1:
            raise ValueError("alphabet size must be >= 1")
        self.m = m
        self.freqs = [1] * m
        self.total = m

    @property
    def counts(self) -> list[int]:
        return [f - 1 for f in self.freqs]

    def probability(self, s: int) -> float:
        return self.freqs[s] / self.total

    def update(self, s: int) -> None:
        self.freqs[s] += 1
        self.total += 1
        if self.total - self.m >= RESCALE_BOUND:
            self.freqs = [((f - 1) >> 1) + 1 for f in self.freqs]
            self.total = sum(self.freqs)


def binary_contexts(n: int) -> list[BinaryContext]:
    return [BinaryContext() for _ in range(n)]


def symbol_contexts(n: int, m: int) -> list[SymbolContext]:
    return [SymbolContext(m) for _ in range(n)]


class RangeEncoder:
    def __init__(self) -> None:
        self.low = 0
        self.range = _MASK32
        self._cache = 0
        self._cache_size = 1
        self._out = bytearray()
        self._done = False

    def _shift_low(self) -> None:
        low = self.low
        if low < 0xFF000000 or low > _MASK32:
            carry = low >> 32
            out = self._out
            out.append((self._cache + carry) & 0xFF)
            for _ in range(self._cache_size - 1):
                out.append((0xFF + carry) & 0xFF)
            self._cache_size = 0
            self._cache = (low >> 24) & 0xFF
        self._cache_size += 1
        self.low = (low << 8) & _MASK32

    def encode_freq(self, cum: int, freq: int, total: int) -> None:
        r = self.range // total
        self.low += r * cum
        self.range = r * freq
        while self.range < _TOP:
            self.range <<= 8
            self._shift_low()

    def encode_bit(self, ctx: BinaryContext, bit: int) -> None:
        n0 = ctx.n0
        n1 = ctx.n1
        r = self.range // (n0 + n1 + 2)
        if bit:
            self.low += r * (n0 + 1)
            self.range = r * (n1 + 1)
            n1 += 1
        else:
            self.range = r * (n0 + 1)
            n0 += 1
        if n0 + n1 >= RESCALE_BOUND:
            n0 >>= 1
            n1 >>= 1
        ctx.n0 = n0
        ctx.n1 = n1
        while self.range < _TOP:
            self.range <<= 8
            self._shift_low()

    def encode_symbol(self, ctx: SymbolContext, s: int) -> None:
        if not 0 <= s < ctx.m:
            raise ValueError(f"symbol {s} outside alphabet of size {ctx.m}")
        freqs = ctx.freqs
        self.encode_freq(sum(freqs[:s]), freqs[s], ctx.total)
        ctx.update(s)

    def encode_raw_bits(self, value: int, nbits: int) -> None:
        """Equiprobable bits, most significant first (no model)."""
        for i in range(nbits - 1, -1, -1):
            self.range >>= 1
            if (value >> i) & 1:
                self.low += self.range
            while self.range < _TOP:
                self.range <<= 8
                self._shift_low()

    def finish(self) -> bytes:
        """Flush and return the payload; an encoder that never coded anything yields b""."""
        if not self._done:
            if not self._out and self.low == 0 and self.range == _MASK32 and self._cache_size == 1:
                self._done = True
                return b""
            for _ in range(5):
                self._shift_low()
            self._done = True
        return bytes(self._out)


class RangeDecoder:
    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0
        self.range = _MASK32
        self.code = 0
        if not data:
            self.decode_bit = self.decode_symbol = self.decode_raw_bits = self._empty
            return
        for _ in range(5):
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32

    def _empty(self, *_args) -> int:
        raise TruncatedStreamError("decode requested from an empty stream")

    def _next_byte(self) -> int:
        pos = self._pos
        if pos >= len(self._data):
            raise TruncatedStreamError("range decoder read past end of stream")
        self._pos = pos + 1
        return self._data[pos]

    def _normalize(self) -> None:
        while self.range < _TOP:
            self.range <<= 8
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32

    def decode_freq(self, total: int) -> tuple[int, int]:
        """Return ``(target, r)``; caller must follow with :meth:`consume`."""
        r = self.range // total
        target = self.code // r
        if target >= total:
            raise CorruptStreamError("range decoder target outside model total")
        return target, r

    def consume(self, r: int, cum: int, freq: int) -> None:
        self.code -= r * cum
        self.range = r * freq
        self._normalize()

    def decode_bit(self, ctx: BinaryContext) -> int:
        n0 = ctx.n0
        n1 = ctx.n1
        r = self.range // (n0 + n1 + 2)
        bound = r * (n0 + 1)
        if self.code < bound:
            self.range = bound
            n0 += 1
            bit = 0
        else:
            self.code -= bound
            self.range = r * (n1 + 1)
            if self.code >= self.range:
                raise CorruptStreamError("range decoder code outside interval")
            n1 += 1
            bit = 1
        if n0 + n1 >= RESCALE_BOUND:
            n0 >>= 1
            n1 >>= 1
        ctx.n0 = n0
        ctx.n1 = n1
        while self.range < _TOP:
            self.range <<= 8
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32
        return bit

    def decode_symbol(self, ctx: SymbolContext) -> int:
        target, r = self.decode_freq(ctx.total)
        acc = list(accumulate(ctx.freqs))
        s = bisect_right(acc, target)
        freq = ctx.freqs[s]
        self.consume(r, acc[s] - freq, freq)
        ctx.update(s)
        return s

    def decode_raw_bits(self, nbits: int) -> int:
        value = 0
        for _ in range(nbits):
            self.range >>= 1
            if self.code >= self.range:
                self.code -= self.range
                value = (value << 1) | 1
            else:
                value <<= 1
            self._normalize()
        return value

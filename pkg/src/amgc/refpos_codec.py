"""Match-position stream: duplicate removal, median-predicted deltas, bit-plane coding.

Consecutive equal positions are dropped and flagged in PosEqual.  Each
surviving position is predicted by the median of the three previous
surviving positions (zeros before the start), and the signed residual is
split into a sign, the index of its leading one bit (MSB) and the bits below
it (RestBit), each routed to its own substream.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

from .coder import BinaryContext, RangeDecoder, RangeEncoder, SymbolContext, binary_contexts
from .errors import CorruptStreamError

POS_BITS = 32
ZERO = 0  # MSB symbol for a zero residual; symbols 1..32 carry msb + 1
MSB_SYMBOLS = POS_BITS + 1

STREAMS = ("PosEqual", "Sign", "MSB", "RestBit")


def dedup(positions: Sequence[int]) -> tuple[list[int], list[int]]:
    """Return ``(pos_equal_bits, unique_sequence)``; bit x is 1 iff p(x) == p(x-1)."""
    bits: list[int] = []
    unique: list[int] = []
    prev = None
    for p in positions:
        if prev is not None and p == prev:
            bits.append(1)
        else:
            bits.append(0)
            unique.append(p)
        prev = p
    return bits, unique


def undedup(bits: Sequence[int], unique: Sequence[int]) -> list[int]:
    out: list[int] = []
    it = iter(unique)
    for i, b in enumerate(bits):
        if b:
            if i == 0:
                raise CorruptStreamError("first PosEqual bit must be 0")
            out.append(out[-1])
        else:
            out.append(next(it))
    return out


def _mid(a: int, b: int, c: int) -> int:
    if a > b:
        a, b = b, a
    if b > c:
        b = c
    return a if a > b else b


def median_delta(unique: Sequence[int]) -> list[int]:
    """d(x) = p(x) - median(p(x-1), p(x-2), p(x-3)) with three leading zeros."""
    p1 = p2 = p3 = 0
    out = []
    for p in unique:
        out.append(p - _mid(p1, p2, p3))
        p1, p2, p3 = p, p1, p2
    return out


def median_undelta(deltas: Sequence[int]) -> list[int]:
    p1 = p2 = p3 = 0
    out = []
    for d in deltas:
        p = d + _mid(p1, p2, p3)
        out.append(p)
        p1, p2, p3 = p, p1, p2
    return out


@dataclass(frozen=True)
class BitPlaneForm:
    zero: bool
    negative: bool = False
    msb: int = 0
    rest: int = 0

    @classmethod
    def of(cls, value: int) -> BitPlaneForm:
        if value == 0:
            return cls(True)
        mag = -value if value < 0 else value
        msb = mag.bit_length() - 1
        return cls(False, value < 0, msb, mag - (1 << msb))

    def value(self) -> int:
        if self.zero:
            return 0
        mag = (1 << self.msb) | self.rest
        return -mag if self.negative else mag


class BitPlaneModel:
    """Contexts for one integer stream: sign, MSB (33 symbols), rest bits keyed by (msb, plane)."""

    def __init__(self, bits: int = POS_BITS) -> None:
        self.bits = bits
        self.sign = BinaryContext()
        self.msb = SymbolContext(bits + 1)
        self.rest = binary_contexts(bits * bits)

    def encode(self, value: int, sign_enc: RangeEncoder, msb_enc: RangeEncoder,
               rest_enc: RangeEncoder, signed: bool = True) -> None:
        if value == 0:
            msb_enc.encode_symbol(self.msb, ZERO)
            return
        mag = value
        if value < 0:
            if not signed:
                raise ValueError("negative value in unsigned stream")
            mag = -value
        msb = mag.bit_length() - 1
        if msb >= self.bits:
            raise ValueError(f"value {value} needs more than {self.bits} bits")
        if signed:
            sign_enc.encode_bit(self.sign, 1 if value < 0 else 0)
        msb_enc.encode_symbol(self.msb, msb + 1)
        row = self.rest
        base = msb * self.bits
        for plane in range(msb - 1, -1, -1):
            rest_enc.encode_bit(row[base + plane], (mag >> plane) & 1)

    def decode(self, sign_dec: RangeDecoder, msb_dec: RangeDecoder, rest_dec: RangeDecoder,
               signed: bool = True) -> int:
        sym = msb_dec.decode_symbol(self.msb)
        if sym == ZERO:
            return 0
        negative = sign_dec.decode_bit(self.sign) if signed else 0
        msb = sym - 1
        mag = 1
        row = self.rest
        base = msb * self.bits
        for plane in range(msb - 1, -1, -1):
            mag = (mag << 1) | rest_dec.decode_bit(row[base + plane])
        return -mag if negative else mag


def encode_uint(model: BitPlaneModel, enc: RangeEncoder, value: int) -> None:
    model.encode(value, enc, enc, enc, signed=False)


def decode_uint(model: BitPlaneModel, dec: RangeDecoder) -> int:
    return model.decode(dec, dec, dec, signed=False)


def encode_refpos(positions: Sequence[int]) -> dict[str, bytes]:
    """Encode one block's positions into the PosEqual/Sign/MSB/RestBit substreams."""
    for p in positions:
        if not 0 <= p < 1 << POS_BITS:
            raise ValueError(f"position {p} outside 32-bit range")
    bits, unique = dedup(positions)
    encs = {name: RangeEncoder() for name in STREAMS}
    eq_ctx = binary_contexts(2)
    prev = 0
    peq = encs["PosEqual"]
    for b in bits:
        peq.encode_bit(eq_ctx[prev], b)
        prev = b
    model = BitPlaneModel()
    sign, msb, rest = encs["Sign"], encs["MSB"], encs["RestBit"]
    for d in median_delta(unique):
        model.encode(d, sign, msb, rest)
    return {name: enc.finish() for name, enc in encs.items()}


def decode_refpos(streams: dict[str, bytes], count: int) -> list[int]:
    decs = {name: RangeDecoder(streams[name]) for name in STREAMS}
    eq_ctx = binary_contexts(2)
    prev = 0
    peq = decs["PosEqual"]
    bits = []
    for _ in range(count):
        b = peq.decode_bit(eq_ctx[prev])
        bits.append(b)
        prev = b
    model = BitPlaneModel()
    sign, msb, rest = decs["Sign"], decs["MSB"], decs["RestBit"]
    n_unique = count - sum(bits)
    deltas = [model.decode(sign, msb, rest) for _ in range(n_unique)]
    positions = undedup(bits, median_undelta(deltas))
    for p in positions:
        if not 0 <= p < 1 << POS_BITS:
            raise CorruptStreamError(f"decoded position {p} outside 32-bit range")
    return positions


def fixed_width_size(count: int) -> int:
    """Baseline: every position stored as a raw 32-bit word."""
    return 4 * count

"""Everything besides positions and mismatch vectors needed to rebuild reads.

MatchMeta   read lengths (variable-length blocks only), match type, split-tree
            leaf flags and strands.
MisValues   read base at each mismatch, ranked among the three bases that
            differ from the reference base (context: the reference base).
UnmapSeq    bases of unmapped leaves, order-2 context over the concatenation.
NMask       per-read has-N flag plus gap-coded N positions.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .aligner import (
    FULL, MISMATCHED, SPLIT, UNMAPPED, MatchOutcome, SegmentMatch, SplitNode,
    UnmappedLeaf, iter_leaves, oriented_window,
)
from .coder import RangeDecoder, RangeEncoder, binary_contexts, symbol_contexts
from .errors import CorruptStreamError
from .refindex import RefSequence
from .refpos_codec import BitPlaneModel, decode_uint, encode_uint

_MAX_DEPTH_CTX = 8
_N = 4


# ---------------------------------------------------------------- MatchMeta

@dataclass
class LeafSpec:
    """Decoder-side skeleton of one leaf before the payload streams are read."""

    offset: int
    length: int
    matched: bool
    reverse: bool = False
    exact: bool = True


@dataclass
class ReadSkeleton:
    length: int
    match_type: int
    leaves: list[LeafSpec] = field(default_factory=list)


class _MetaModel:
    def __init__(self) -> None:
        self.same_len = binary_contexts(2)
        self.length = BitPlaneModel()
        self.mtype = symbol_contexts(4, 4)
        self.strand = binary_contexts(2)
        self.exact = binary_contexts(_MAX_DEPTH_CTX)
        self.matched = binary_contexts(_MAX_DEPTH_CTX * 2)


def encode_meta(outcomes: Sequence[MatchOutcome], min_len: int, variable_length: bool) -> bytes:
    """Serialise lengths, match types and split trees of one block."""
    enc = RangeEncoder()
    m = _MetaModel()
    prev_len = 0
    prev_type = FULL
    for out in outcomes:
        n = out.read_length
        if variable_length:
            same = int(n == prev_len)
            enc.encode_bit(m.same_len[0], same)
            if not same:
                encode_uint(m.length, enc, n)
            prev_len = n
        t = out.match_type
        enc.encode_symbol(m.mtype[prev_type], t)
        prev_type = t
        if t in (FULL, MISMATCHED):
            enc.encode_bit(m.strand[0], int(out.tree.reverse))
        elif t == SPLIT:
            if n // 2 < min_len:
                raise ValueError("split tree on a read too short to split")
            _encode_children(enc, m, out.tree, min_len, 1)
    return enc.finish()


def _encode_children(enc: RangeEncoder, m: _MetaModel, node: SplitNode, min_len: int, depth: int) -> None:
    for child in (node.left, node.right):
        d = min(depth, _MAX_DEPTH_CTX - 1)
        splittable = child.length // 2 >= min_len
        matched = isinstance(child, SegmentMatch)
        enc.encode_bit(m.matched[2 * d + splittable], int(matched))
        if matched:
            enc.encode_bit(m.strand[1], int(child.reverse))
            enc.encode_bit(m.exact[d], int(child.exact))
        elif splittable:
            if not isinstance(child, SplitNode):
                raise ValueError("failed splittable segment was not split")
            _encode_children(enc, m, child, min_len, depth + 1)
        elif not isinstance(child, UnmappedLeaf):
            raise ValueError("unsplittable failed segment must be an unmapped leaf")


def decode_meta(data: bytes, count: int, min_len: int, fixed_length: int) -> list[ReadSkeleton]:
    """Inverse of :func:`encode_meta`; ``fixed_length`` 0 means lengths are in the stream."""
    dec = RangeDecoder(data)
    m = _MetaModel()
    prev_len = 0
    prev_type = FULL
    out = []
    for _ in range(count):
        if fixed_length:
            n = fixed_length
        else:
            if dec.decode_bit(m.same_len[0]):
                n = prev_len
            else:
                n = decode_uint(m.length, dec)
            prev_len = n
        if n < 1:
            raise CorruptStreamError("decoded read length 0")
        t = dec.decode_symbol(m.mtype[prev_type])
        prev_type = t
        skel = ReadSkeleton(n, t)
        if t in (FULL, MISMATCHED):
            skel.leaves.append(LeafSpec(0, n, True, bool(dec.decode_bit(m.strand[0])), t == FULL))
        elif t == UNMAPPED:
            skel.leaves.append(LeafSpec(0, n, False))
        else:
            if n // 2 < min_len:
                raise CorruptStreamError("split flag on an unsplittable read")
            _decode_children(dec, m, 0, n, min_len, 1, skel.leaves)
        out.append(skel)
    return out


def _decode_children(dec: RangeDecoder, m: _MetaModel, offset: int, n: int, min_len: int,
                     depth: int, leaves: list[LeafSpec]) -> None:
    half = n // 2
    for off, length in ((offset, half), (offset + half, n - half)):
        d = min(depth, _MAX_DEPTH_CTX - 1)
        splittable = length // 2 >= min_len
        if dec.decode_bit(m.matched[2 * d + splittable]):
            reverse = bool(dec.decode_bit(m.strand[1]))
            exact = bool(dec.decode_bit(m.exact[d]))
            leaves.append(LeafSpec(off, length, True, reverse, exact))
        elif splittable:
            _decode_children(dec, m, off, length, min_len, depth + 1, leaves)
        else:
            leaves.append(LeafSpec(off, length, False))


def tree_signature(node) -> tuple:
    """Nested fail/ok shape, e.g. ('fail', ('ok',), ('fail', ('ok',), ('fail-leaf',)))."""
    if isinstance(node, SplitNode):
        return ("fail", tree_signature(node.left), tree_signature(node.right))
    if isinstance(node, SegmentMatch):
        return ("ok",)
    return ("fail-leaf",)


# ---------------------------------------------------------------- MisValues

def misvalue_rank(read_base: int, ref_base: int) -> int:
    """Rank of ``read_base`` in ACGT with ``ref_base`` removed."""
    if read_base == ref_base:
        raise ValueError("a mismatch cannot equal the reference base")
    if read_base == _N:
        return 0
    return read_base - (read_base > ref_base)


def misvalue_base(rank: int, ref_base: int) -> int:
    return rank + (rank >= ref_base)


def encode_misvalues(outcomes: Sequence[MatchOutcome], ref: RefSequence) -> bytes:
    enc = RangeEncoder()
    ctx = symbol_contexts(4, 3)
    for out in outcomes:
        for leaf in iter_leaves(out.tree):
            if not isinstance(leaf, SegmentMatch) or leaf.exact:
                continue
            target = oriented_window(ref, leaf.refpos, leaf.length, leaf.reverse)
            for i, r in zip(np.flatnonzero(leaf.mispos).tolist(), leaf.misvalues.tolist()):
                b = int(target[i])
                enc.encode_symbol(ctx[b], misvalue_rank(r, b))
    return enc.finish()


def encode_misvalue_symbols(pairs: Sequence[tuple[int, int]]) -> bytes:
    """Code (ref_base, read_base) pairs directly; used by tests and stats."""
    enc = RangeEncoder()
    ctx = symbol_contexts(4, 3)
    for b, r in pairs:
        enc.encode_symbol(ctx[b], misvalue_rank(r, b))
    return enc.finish()


class MisvalueDecoder:
    def __init__(self, data: bytes) -> None:
        self._dec = RangeDecoder(data)
        self._ctx = symbol_contexts(4, 3)

    def next(self, ref_base: int) -> int:
        return misvalue_base(self._dec.decode_symbol(self._ctx[ref_base]), ref_base)


# ---------------------------------------------------------------- UnmapSeq

def encode_unmapped(leaf_bases: Sequence[np.ndarray]) -> bytes:
    """Order-2 coding of the concatenated unmapped bases (N is sent as A)."""
    enc = RangeEncoder()
    ctx = symbol_contexts(16, 4)
    h = 0
    for bases in leaf_bases:
        for b in bases.tolist():
            if b == _N:
                b = 0
            enc.encode_symbol(ctx[h], b)
            h = ((h << 2) | b) & 15
    return enc.finish()


def decode_unmapped(data: bytes, total: int) -> np.ndarray:
    dec = RangeDecoder(data)
    ctx = symbol_contexts(16, 4)
    h = 0
    out = np.zeros(total, dtype=np.uint8)
    for i in range(total):
        b = dec.decode_symbol(ctx[h])
        out[i] = b
        h = ((h << 2) | b) & 15
    return out


# ---------------------------------------------------------------- NMask

class _NMaskModel:
    def __init__(self) -> None:
        self.flag = binary_contexts(2)
        self.count = BitPlaneModel()
        self.gap = BitPlaneModel()


def encode_nmask(reads: Sequence[np.ndarray]) -> bytes:
    enc = RangeEncoder()
    m = _NMaskModel()
    prev = 0
    for codes in reads:
        npos = np.flatnonzero(codes == _N).tolist()
        flag = int(bool(npos))
        enc.encode_bit(m.flag[prev], flag)
        prev = flag
        if flag:
            encode_uint(m.count, enc, len(npos) - 1)
            last = -1
            for p in npos:
                encode_uint(m.gap, enc, p - last - 1)
                last = p
    return enc.finish()


def decode_nmask(data: bytes, lengths: Sequence[int]) -> list[list[int]]:
    dec = RangeDecoder(data)
    m = _NMaskModel()
    prev = 0
    out = []
    for n in lengths:
        flag = dec.decode_bit(m.flag[prev])
        prev = flag
        positions = []
        if flag:
            count = decode_uint(m.count, dec) + 1
            last = -1
            for _ in range(count):
                last = last + 1 + decode_uint(m.gap, dec)
                positions.append(last)
            if count > n or last >= n:
                raise CorruptStreamError("N position beyond read end")
        out.append(positions)
    return out

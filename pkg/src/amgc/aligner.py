"""Seed-and-extend alignment with recursive halving of failed segments.

Reads are handled as uint8 code arrays (A=0, C=1, G=2, T=3, N=4).  A segment
is placed by looking up k-mer seeds at a few fixed offsets, then every
candidate window is compared base by base over the whole segment.  A read
whose whole-length alignment fails is cut into floor(n/2) + ceil(n/2) halves
which are aligned independently, recursively, while halves stay >= min_len.
"""
from __future__ import annotations

import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fastq import ReadBlock
from .refindex import DEFAULT_K, KmerIndex, RefSequence, encode_bases, reverse_complement

FULL, MISMATCHED, SPLIT, UNMAPPED = range(4)
MATCH_TYPE_NAMES = ("full", "mismatched", "split", "unmapped")

_N = 4


@dataclass(frozen=True)
class AlignerConfig:
    k: int = DEFAULT_K
    num_seeds: int = 4
    mismatch_rate: Fraction = Fraction(1, 10)
    min_len: int = 25
    max_candidates_per_seed: int = 16

    def __post_init__(self) -> None:
        object.__setattr__(self, "mismatch_rate", Fraction(self.mismatch_rate).limit_denominator(10**6))
        if self.mismatch_rate < 0:
            raise ValueError("mismatch rate must be non-negative")
        if self.min_len < self.k:
            raise ValueError("min_len must be >= k")
        if self.num_seeds < 1 or self.max_candidates_per_seed < 1:
            raise ValueError("num_seeds and max_candidates_per_seed must be >= 1")

    def threshold(self, length: int) -> int:
        """Largest mismatch count accepted for a segment of ``length`` bases."""
        return math.ceil(self.mismatch_rate * length)

    def can_split(self, length: int) -> bool:
        return length // 2 >= self.min_len

    def seed_offsets(self, length: int) -> list[int]:
        span = length - self.k
        if self.num_seeds == 1:
            return [0]
        return sorted({i * span // (self.num_seeds - 1) for i in range(self.num_seeds)})


NO_SPLIT = 1 << 30  # min_len value that disables recursive splitting


@dataclass(eq=False)
class SegmentMatch:
    refpos: int
    reverse: bool
    mispos: np.ndarray  # bool, read order
    misvalues: np.ndarray  # uint8 codes of the read bases at mismatches

    @property
    def length(self) -> int:
        return int(self.mispos.size)

    @property
    def mismatches(self) -> int:
        return int(self.misvalues.size)

    @property
    def exact(self) -> bool:
        return self.misvalues.size == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegmentMatch):
            return NotImplemented
        return (self.refpos == other.refpos and self.reverse == other.reverse
                and np.array_equal(self.mispos, other.mispos)
                and np.array_equal(self.misvalues, other.misvalues))


@dataclass(eq=False)
class UnmappedLeaf:
    bases: np.ndarray

    @property
    def length(self) -> int:
        return int(self.bases.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnmappedLeaf):
            return NotImplemented
        return np.array_equal(self.bases, other.bases)


@dataclass(eq=True)
class SplitNode:
    left: Node
    right: Node

    @property
    def length(self) -> int:
        return self.left.length + self.right.length


Node = SegmentMatch | UnmappedLeaf | SplitNode
Leaf = SegmentMatch | UnmappedLeaf


def iter_leaves(node: Node) -> Iterator[Leaf]:
    if isinstance(node, SplitNode):
        yield from iter_leaves(node.left)
        yield from iter_leaves(node.right)
    else:
        yield node


@dataclass(eq=True)
class MatchOutcome:
    tree: Node

    @property
    def read_length(self) -> int:
        return self.tree.length

    @property
    def match_type(self) -> int:
        t = self.tree
        if isinstance(t, SplitNode):
            return SPLIT
        if isinstance(t, UnmappedLeaf):
            return UNMAPPED
        return FULL if t.exact else MISMATCHED

    def leaves(self) -> list[Leaf]:
        return list(iter_leaves(self.tree))

    def mapped_bases(self) -> int:
        return sum(leaf.length for leaf in iter_leaves(self.tree) if isinstance(leaf, SegmentMatch))


def oriented_window(ref: RefSequence, refpos: int, length: int, reverse: bool) -> np.ndarray:
    window = ref.codes[refpos:refpos + length]
    return reverse_complement(window) if reverse else window


def make_match(seg: np.ndarray, ref: RefSequence, refpos: int, reverse: bool) -> SegmentMatch:
    target = oriented_window(ref, refpos, seg.size, reverse)
    mispos = seg != target
    return SegmentMatch(refpos, reverse, mispos, seg[mispos].copy())


def _candidates(seq: np.ndarray, index: KmerIndex, ref_len: int, offsets: Sequence[int], cap: int) -> np.ndarray:
    k = index.k
    n = seq.size
    offs = np.asarray(offsets, dtype=np.int64)
    seeds = seq[offs[:, None] + np.arange(k)].astype(np.int64)
    usable = seeds.max(axis=1) < _N
    codes = seeds @ (4 ** np.arange(k - 1, -1, -1, dtype=np.int64))
    slots = np.searchsorted(index.keys, codes)
    found = []
    nkeys = index.keys.size
    for j in np.flatnonzero(usable).tolist():
        slot = int(slots[j])
        if slot < nkeys and index.keys[slot] == codes[j]:
            lo = int(index.offsets[slot])
            hi = min(int(index.offsets[slot + 1]), lo + cap)
            found.append(index.positions[lo:hi].astype(np.int64) - offsets[j])
    if not found:
        return np.zeros(0, dtype=np.int64)
    starts = np.unique(np.concatenate(found))
    return starts[(starts >= 0) & (starts + n <= ref_len)]


def _best(seq: np.ndarray, ref: RefSequence, starts: np.ndarray) -> tuple[int, int]:
    """(fewest mismatches, smallest refpos achieving it) over sorted ``starts``."""
    windows = ref.codes[starts[:, None] + np.arange(seq.size)]
    mism = np.count_nonzero(windows != seq, axis=1)
    i = int(np.argmin(mism))
    return int(mism[i]), int(starts[i])


def align_segment(bases: np.ndarray | bytes, index: KmerIndex, ref: RefSequence,
                  config: AlignerConfig) -> SegmentMatch | None:
    """Best seeded placement of ``bases`` on either strand, or None on failure.

    Among all examined candidates the fewest mismatches wins; ties go to the
    smallest refpos, then to the forward strand.
    """
    seg = encode_bases(bases) if isinstance(bases, (bytes, bytearray)) else bases
    n = seg.size
    if n < index.k:
        return None
    offsets = config.seed_offsets(n)
    cap = config.max_candidates_per_seed
    best: tuple[int, int, int] | None = None
    rc = reverse_complement(seg)
    for strand, seq in ((0, seg), (1, rc)):
        starts = _candidates(seq, index, ref.total_length, offsets, cap)
        if starts.size == 0:
            continue
        mm, pos = _best(seq, ref, starts)
        cand = (mm, pos, strand)
        if best is None or cand < best:
            best = cand
    if best is None or best[0] > config.threshold(n):
        return None
    return make_match(seg, ref, best[1], bool(best[2]))


def recursive_split_align(bases: np.ndarray | bytes, index: KmerIndex, ref: RefSequence,
                          config: AlignerConfig) -> MatchOutcome:
    seg = encode_bases(bases) if isinstance(bases, (bytes, bytearray)) else bases
    return MatchOutcome(_split_align(seg, index, ref, config))


def _split_align(seg: np.ndarray, index: KmerIndex, ref: RefSequence, config: AlignerConfig) -> Node:
    match = align_segment(seg, index, ref, config)
    if match is not None:
        return match
    n = seg.size
    if not config.can_split(n):
        return UnmappedLeaf(seg.copy())
    half = n // 2
    return SplitNode(_split_align(seg[:half], index, ref, config),
                     _split_align(seg[half:], index, ref, config))


def align_block(block: ReadBlock, index: KmerIndex, ref: RefSequence, config: AlignerConfig) -> list[MatchOutcome]:
    return [recursive_split_align(encode_bases(r.bases), index, ref, config) for r in block.reads]


def reconstruct(outcome: MatchOutcome, ref: RefSequence) -> np.ndarray:
    """Replay leaves against the reference (the decoder's view of a read)."""
    parts = []
    for leaf in iter_leaves(outcome.tree):
        if isinstance(leaf, UnmappedLeaf):
            parts.append(leaf.bases)
        else:
            seg = oriented_window(ref, leaf.refpos, leaf.length, leaf.reverse).copy()
            seg[leaf.mispos] = leaf.misvalues
            parts.append(seg)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.uint8)

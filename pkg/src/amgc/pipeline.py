"""Block-level encode/decode and whole-archive compress/decompress."""
from __future__ import annotations

import os
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import container
from .aligner import AlignerConfig, MatchOutcome, SegmentMatch, align_block, iter_leaves, oriented_window
from .container import (
    FLAG_CASE_NORMALIZED, FLAG_PASSTHROUGH, FLAG_VARIABLE_LENGTH, ArchiveHeader, EncodedBlock,
)
from .errors import CorruptStreamError
from .fastq import DEFAULT_BLOCK_SIZE, ReadBlock, ReadRecord, split_blocks
from .mispos_codec import decode_mispos, encode_mispos
from .refindex import KmerIndex, RefSequence, decode_bases, encode_bases
from .refpos_codec import decode_refpos, encode_refpos
from .residual_codec import (
    MisvalueDecoder, decode_meta, decode_nmask, decode_unmapped, encode_meta, encode_misvalues,
    encode_nmask, encode_unmapped,
)

_N = 4


def block_fixed_length(block: ReadBlock) -> int:
    lengths = {r.length for r in block.reads}
    return lengths.pop() if len(lengths) == 1 else 0


def encode_outcomes(block: ReadBlock, outcomes: Sequence[MatchOutcome], ref: RefSequence,
                    min_len: int, passthrough: bool = False) -> EncodedBlock:
    """Turn one block's alignment outcomes into its named substreams."""
    read_codes = [encode_bases(r.bases) for r in block.reads]
    positions: list[int] = []
    vectors: list[np.ndarray] = []
    unmapped: list[np.ndarray] = []
    for codes, out in zip(read_codes, outcomes):
        offset = 0
        nmask = codes == _N
        for leaf in iter_leaves(out.tree):
            if isinstance(leaf, SegmentMatch):
                positions.append(leaf.refpos)
                if not leaf.exact:
                    vectors.append(leaf.mispos)
                if not leaf.mispos[nmask[offset:offset + leaf.length]].all():
                    raise AssertionError("N base in a mapped segment without a mismatch flag")
            else:
                unmapped.append(leaf.bases)
            offset += leaf.length
        if offset != codes.size:
            raise AssertionError("leaf lengths do not cover the read")
    fixed = block_fixed_length(block)
    streams = encode_refpos(positions)
    streams["MisposBits"] = encode_mispos(vectors)
    streams["MisValues"] = encode_misvalues(outcomes, ref)
    streams["UnmapSeq"] = encode_unmapped(unmapped)
    streams["MatchMeta"] = encode_meta(outcomes, min_len, variable_length=fixed == 0)
    streams["NMask"] = encode_nmask(read_codes)
    if passthrough:
        streams["Passthrough"] = b"".join((r.identifier or b"@") + b"\n" + (r.quality or b"") + b"\n"
                                          for r in block.reads)
    else:
        streams["Passthrough"] = b""
    return EncodedBlock(len(block.reads), fixed, block.raw_byte_budget, streams)


def encode_block(block: ReadBlock, index: KmerIndex, ref: RefSequence, config: AlignerConfig,
                 passthrough: bool = False) -> EncodedBlock:
    return encode_outcomes(block, align_block(block, index, ref, config), ref, config.min_len, passthrough)


def decode_block(streams: dict[str, bytes], read_count: int, read_length: int, ref: RefSequence,
                 min_len: int, passthrough: bool = False) -> list[ReadRecord]:
    skeletons = decode_meta(streams["MatchMeta"], read_count, min_len, read_length)
    matched = [leaf for s in skeletons for leaf in s.leaves if leaf.matched]
    positions = decode_refpos(streams, len(matched))
    inexact = [leaf.length for leaf in matched if not leaf.exact]
    vectors = iter(decode_mispos(streams["MisposBits"], inexact))
    nmasks = decode_nmask(streams["NMask"], [s.length for s in skeletons])
    unmapped_total = sum(leaf.length for s in skeletons for leaf in s.leaves if not leaf.matched)
    unmapped = decode_unmapped(streams["UnmapSeq"], unmapped_total)
    misvalues = MisvalueDecoder(streams["MisValues"])
    pos_iter = iter(positions)
    ucursor = 0
    reads = []
    for ordinal, (skel, npos) in enumerate(zip(skeletons, nmasks)):
        codes = np.empty(skel.length, dtype=np.uint8)
        for leaf in skel.leaves:
            if leaf.matched:
                refpos = next(pos_iter)
                if refpos + leaf.length > ref.total_length:
                    raise CorruptStreamError("match position runs past the reference end")
                seg = oriented_window(ref, refpos, leaf.length, leaf.reverse).copy()
                if not leaf.exact:
                    mispos = next(vectors)
                    for i in np.flatnonzero(mispos).tolist():
                        seg[i] = misvalues.next(int(seg[i]))
                codes[leaf.offset:leaf.offset + leaf.length] = seg
            else:
                codes[leaf.offset:leaf.offset + leaf.length] = unmapped[ucursor:ucursor + leaf.length]
                ucursor += leaf.length
        if npos:
            codes[npos] = _N
        reads.append(ReadRecord(decode_bases(codes), ordinal))
    if passthrough:
        lines = streams["Passthrough"].split(b"\n")
        if len(lines) != 2 * read_count + 1:
            raise CorruptStreamError("pass-through stream has the wrong number of lines")
        reads = [ReadRecord(r.bases, r.ordinal, lines[2 * i], lines[2 * i + 1]) for i, r in enumerate(reads)]
    return reads


@dataclass
class CompressResult:
    archive: bytes
    header: ArchiveHeader
    blocks: list[EncodedBlock]
    original_bytes: int

    @property
    def ratio(self) -> float:
        return self.original_bytes / len(self.archive) if self.archive else float("inf")

    def stream_sizes(self) -> dict[str, int]:
        sizes = dict.fromkeys(container.STREAM_NAMES, 0)
        for blk in self.blocks:
            for name, data in blk.streams.items():
                sizes[name] += len(data)
        return sizes


_worker_state: tuple | None = None


def _init_worker(ref, index, config, min_len, passthrough) -> None:
    global _worker_state
    _worker_state = (ref, index, config, min_len, passthrough)


def _encode_in_worker(block: ReadBlock) -> EncodedBlock:
    ref, index, config, _, passthrough = _worker_state
    return encode_block(block, index, ref, config, passthrough)


def compress_reads(reads: Iterable[ReadRecord], ref: RefSequence, index: KmerIndex,
                   config: AlignerConfig | None = None, block_size: int = DEFAULT_BLOCK_SIZE,
                   threads: int = 1, passthrough: bool = False) -> CompressResult:
    """Align and encode ``reads`` block by block; output is independent of ``threads``."""
    config = config or AlignerConfig(k=index.k)
    if config.k != index.k:
        raise ValueError("aligner k differs from index k")
    blocks = list(split_blocks(reads, block_size))
    original = sum(r.length + 1 for b in blocks for r in b.reads)
    if threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=threads, initializer=_init_worker,
                                 initargs=(ref, index, config, config.min_len, passthrough)) as pool:
            encoded = list(pool.map(_encode_in_worker, blocks))
    else:
        encoded = [encode_block(b, index, ref, config, passthrough) for b in blocks]
    flags = FLAG_CASE_NORMALIZED
    if any(e.read_length == 0 for e in encoded if e.read_count) or len({e.read_length for e in encoded}) > 1:
        flags |= FLAG_VARIABLE_LENGTH
    if passthrough:
        flags |= FLAG_PASSTHROUGH
    header = ArchiveHeader(ref.digest, ref.total_length, index.k, config.min_len, flags)
    archive = container.serialize_archive(header, encoded)
    return CompressResult(archive, header, encoded, original)


def decompress_archive(data: bytes, ref: RefSequence) -> list[ReadRecord]:
    header, blocks = container.read_archive(data, ref_digest=ref.digest)
    passthrough = bool(header.flags & FLAG_PASSTHROUGH)
    out: list[ReadRecord] = []
    for entry, streams in zip(header.blocks, blocks):
        out.extend(decode_block(streams, entry.read_count, entry.read_length, ref, header.min_len, passthrough))
    return out


def default_threads() -> int:
    return os.cpu_count() or 1

"""Archive layout: header, block table, then every block's substreams back to back.

All integers are little-endian.  See docs/FORMAT.md for the byte layout.
"""
from __future__ import annotations

import hashlib
import struct
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import BinaryIO

from .errors import (
    BadMagicError, ChecksumError, DigestMismatchError, TruncatedArchiveError, UnsupportedVersionError,
)

MAGIC = b"AMGC"
VERSION = 1

FLAG_VARIABLE_LENGTH = 1 << 0
FLAG_CASE_NORMALIZED = 1 << 1
FLAG_PASSTHROUGH = 1 << 2

STREAM_NAMES = (
    "PosEqual", "Sign", "MSB", "RestBit", "MisposBits",
    "MisValues", "UnmapSeq", "MatchMeta", "NMask", "Passthrough",
)

_HEAD = struct.Struct("<4sHH32sQBxxxII")
_STREAM = struct.Struct("<QI")
_BLOCK_FIXED = struct.Struct("<IIQ")
_CHECK = struct.Struct("<Q")
BLOCK_ENTRY_SIZE = _BLOCK_FIXED.size + len(STREAM_NAMES) * _STREAM.size + _CHECK.size


def checksum64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass
class BlockEntry:
    read_count: int
    read_length: int  # 0 when lengths vary inside the block
    raw_bytes: int
    offsets: list[int] = field(default_factory=list)
    lengths: list[int] = field(default_factory=list)
    checksum: int = 0

    def stream_size(self, name: str) -> int:
        return self.lengths[STREAM_NAMES.index(name)]


@dataclass
class ArchiveHeader:
    digest: bytes
    ref_length: int
    k: int
    min_len: int
    flags: int = FLAG_CASE_NORMALIZED
    version: int = VERSION
    blocks: list[BlockEntry] = field(default_factory=list)

    @property
    def read_count(self) -> int:
        return sum(b.read_count for b in self.blocks)

    @property
    def table_size(self) -> int:
        return _HEAD.size + len(self.blocks) * BLOCK_ENTRY_SIZE + _CHECK.size


@dataclass
class EncodedBlock:
    read_count: int
    read_length: int
    raw_bytes: int
    streams: dict[str, bytes]

    def payload(self) -> bytes:
        return b"".join(self.streams.get(name, b"") for name in STREAM_NAMES)


def serialize_archive(header: ArchiveHeader, blocks: Sequence[EncodedBlock]) -> bytes:
    """Fill ``header.blocks`` from ``blocks`` and return the archive bytes."""
    header.blocks = []
    offset = 0
    payloads = []
    for blk in blocks:
        unknown = set(blk.streams) - set(STREAM_NAMES)
        if unknown:
            raise ValueError(f"unknown substreams {sorted(unknown)}")
        entry = BlockEntry(blk.read_count, blk.read_length, blk.raw_bytes)
        for name in STREAM_NAMES:
            data = blk.streams.get(name, b"")
            entry.offsets.append(offset)
            entry.lengths.append(len(data))
            offset += len(data)
        payload = blk.payload()
        entry.checksum = checksum64(payload)
        header.blocks.append(entry)
        payloads.append(payload)
    table = bytearray(_HEAD.pack(MAGIC, header.version, header.flags, header.digest, header.ref_length,
                                 header.k, header.min_len, len(header.blocks)))
    for e in header.blocks:
        table += _BLOCK_FIXED.pack(e.read_count, e.read_length, e.raw_bytes)
        for off, length in zip(e.offsets, e.lengths):
            table += _STREAM.pack(off, length)
        table += _CHECK.pack(e.checksum)
    table += _CHECK.pack(checksum64(bytes(table)))
    return bytes(table) + b"".join(payloads)


def write_archive(header: ArchiveHeader, blocks: Sequence[EncodedBlock], sink: BinaryIO) -> int:
    data = serialize_archive(header, blocks)
    sink.write(data)
    return len(data)


def parse_header(data: bytes) -> ArchiveHeader:
    """Decode and validate the header and block table (not the payloads)."""
    if len(data) < 4:
        raise TruncatedArchiveError("archive shorter than its magic")
    if data[:4] != MAGIC:
        raise BadMagicError("not an AMGC archive (bad magic)")
    if len(data) < _HEAD.size:
        raise TruncatedArchiveError("archive header truncated")
    _, version, flags, digest, ref_length, k, min_len, nblocks = _HEAD.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported archive version {version} (expected {VERSION})")
    table_end = _HEAD.size + nblocks * BLOCK_ENTRY_SIZE
    if len(data) < table_end + _CHECK.size:
        raise TruncatedArchiveError("block table truncated")
    (stored,) = _CHECK.unpack_from(data, table_end)
    if stored != checksum64(data[:table_end]):
        raise ChecksumError("header/block table checksum mismatch")
    header = ArchiveHeader(digest, ref_length, k, min_len, flags, version)
    pos = _HEAD.size
    expected = 0
    for _ in range(nblocks):
        count, length, raw = _BLOCK_FIXED.unpack_from(data, pos)
        pos += _BLOCK_FIXED.size
        entry = BlockEntry(count, length, raw)
        for _ in STREAM_NAMES:
            off, size = _STREAM.unpack_from(data, pos)
            pos += _STREAM.size
            if off != expected:
                raise ChecksumError("substream offsets are not contiguous")
            expected += size
            entry.offsets.append(off)
            entry.lengths.append(size)
        (entry.checksum,) = _CHECK.unpack_from(data, pos)
        pos += _CHECK.size
        header.blocks.append(entry)
    return header


def read_archive(source: bytes | BinaryIO, ref_digest: bytes | None = None,
                 verify: bool = True) -> tuple[ArchiveHeader, list[dict[str, bytes]]]:
    """Parse an archive into its header and per-block substreams.

    Raises a distinct error for bad magic, unsupported version, reference
    digest mismatch, checksum failure and truncation.
    """
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    data = bytes(data)
    header = parse_header(data)
    if ref_digest is not None and ref_digest != header.digest:
        raise DigestMismatchError("archive was built against a different reference")
    base = header.table_size
    total = sum(sum(e.lengths) for e in header.blocks)
    if len(data) < base + total:
        raise TruncatedArchiveError(f"payload truncated: need {base + total} bytes, have {len(data)}")
    if len(data) > base + total:
        raise ChecksumError("trailing bytes after last block")
    blocks = []
    for i, e in enumerate(header.blocks):
        start = base + e.offsets[0]
        end = start + sum(e.lengths)
        if verify and checksum64(data[start:end]) != e.checksum:
            raise ChecksumError(f"block {i} checksum mismatch", block=i)
        blocks.append({name: data[base + off:base + off + n]
                       for name, off, n in zip(STREAM_NAMES, e.offsets, e.lengths)})
    return header, blocks

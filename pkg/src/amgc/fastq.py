"""FASTQ ingestion and block partitioning of the reads stream."""
from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field

from .errors import FastqParseError

DEFAULT_BLOCK_SIZE = 250 * 1024 * 1024

_ALLOWED = frozenset(b"ACGTN")
_UPPER = bytes.maketrans(b"acgtn", b"ACGTN")


@dataclass(frozen=True)
class ReadRecord:
    bases: bytes
    ordinal: int = 0
    identifier: bytes | None = None
    quality: bytes | None = None

    @property
    def length(self) -> int:
        return len(self.bases)


@dataclass(frozen=True)
class ReadBlock:
    reads: tuple[ReadRecord, ...]
    raw_byte_budget: int = field(default=0)

    def __len__(self) -> int:
        return len(self.reads)


def normalize_bases(line: bytes, record_index: int | None = None) -> bytes:
    """Uppercase ``line`` and reject anything outside ACGTN."""
    bases = line.translate(_UPPER)
    if not bases:
        raise FastqParseError("empty bases line", record_index)
    bad = set(bases) - _ALLOWED
    if bad:
        sym = chr(min(bad))
        raise FastqParseError(f"illegal base symbol {sym!r}", record_index)
    return bases


def parse_fastq(data: bytes | Iterable[bytes], passthrough: bool = False) -> Iterator[ReadRecord]:
    """Yield one :class:`ReadRecord` per 4-line FASTQ record.

    ``data`` is either the whole file content or an iterable of lines (an open
    binary file works).  With ``passthrough`` the identifier and quality lines
    are kept on the record verbatim; otherwise they are dropped.
    """
    lines = data.splitlines() if isinstance(data, (bytes, bytearray)) else data
    buf: list[bytes] = []
    index = 0
    for raw in lines:
        buf.append(raw.rstrip(b"\r\n"))
        if len(buf) < 4:
            continue
        header, seq, plus, qual = buf
        buf = []
        if not header.startswith(b"@"):
            raise FastqParseError("identifier line must start with '@'", index)
        if not plus.startswith(b"+"):
            raise FastqParseError("separator line must start with '+'", index)
        bases = normalize_bases(seq, index)
        if len(qual) != len(bases):
            raise FastqParseError(
                f"bases/quality length mismatch ({len(bases)} vs {len(qual)})", index
            )
        if passthrough:
            yield ReadRecord(bases, index, header, qual)
        else:
            yield ReadRecord(bases, index)
        index += 1
    if buf and any(buf):
        raise FastqParseError("truncated record (line count not a multiple of 4)", index)


def split_blocks(reads: Iterable[ReadRecord], block_size_bytes: int = DEFAULT_BLOCK_SIZE) -> Iterator[ReadBlock]:
    """Greedy partition: a block closes at the first read bringing its base total to >= block_size_bytes.

    Ordinals are rewritten to be block-local.
    """
    if block_size_bytes < 1:
        raise ValueError("block size must be positive")
    current: list[ReadRecord] = []
    used = 0
    for read in reads:
        current.append(ReadRecord(read.bases, len(current), read.identifier, read.quality))
        used += read.length
        if used >= block_size_bytes:
            yield ReadBlock(tuple(current), used)
            current = []
            used = 0
    if current:
        yield ReadBlock(tuple(current), used)


def reads_to_lines(reads: Iterable[ReadRecord]) -> bytes:
    """Bases-only serialisation: one read per line, newline-terminated."""
    return b"".join(r.bases + b"\n" for r in reads)


def format_fastq(reads: Iterable[ReadRecord]) -> bytes:
    out = bytearray()
    for r in reads:
        if r.identifier is None or r.quality is None:
            raise ValueError("record has no identifier/quality to emit")
        out += r.identifier + b"\n" + r.bases + b"\n+\n" + r.quality + b"\n"
    return bytes(out)

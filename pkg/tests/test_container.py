import struct
from collections import Counter
from pathlib import Path

import pytest

from amgc.aligner import UNMAPPED, AlignerConfig, align_block
from amgc.container import (
    BLOCK_ENTRY_SIZE, MAGIC, STREAM_NAMES, ArchiveHeader, EncodedBlock, parse_header, read_archive,
    serialize_archive,
)
from amgc.errors import (
    BadMagicError, ChecksumError, DigestMismatchError, TruncatedArchiveError, UnsupportedVersionError,
)
from amgc.fastq import parse_fastq, split_blocks
from amgc.pipeline import decompress_archive
from amgc.refindex import build_index, load_fasta

DATA = Path(__file__).parent / "data"
DIGEST = bytes(range(32))


def header():
    return ArchiveHeader(DIGEST, 1000, 10, 25)


def block(tag: bytes, count=1):
    return EncodedBlock(count, 100, 101 * count, {n: tag + n.encode() for n in STREAM_NAMES})


@pytest.fixture(scope="module")
def fixture_files():
    return tuple((DATA / n).read_bytes() for n in ("fixture.fa", "fixture.fastq", "fixture.amgc"))


def test_empty_block_archive():
    data = serialize_archive(header(), [EncodedBlock(0, 0, 0, {})])
    h, blocks = read_archive(data, DIGEST)
    assert h.read_count == 0 and len(blocks) == 1
    assert all(v == b"" for v in blocks[0].values())


def test_no_blocks():
    h, blocks = read_archive(serialize_archive(header(), []))
    assert blocks == [] and h.table_size == len(serialize_archive(header(), []))


def test_two_blocks_table_consistent():
    data = serialize_archive(header(), [block(b"x", 3), block(b"yy", 2)])
    h = parse_header(data)
    assert len(h.blocks) == 2 and h.read_count == 5
    offset = 0
    for e in h.blocks:
        for off, n in zip(e.offsets, e.lengths):
            assert off == offset
            offset += n
    assert h.table_size + offset == len(data)
    _, blocks = read_archive(data)
    assert blocks[1]["MSB"] == b"yyMSB"


def test_unknown_stream_rejected():
    with pytest.raises(ValueError):
        serialize_archive(header(), [EncodedBlock(1, 1, 2, {"Bogus": b"x"})])


def test_error_classes():
    data = serialize_archive(header(), [block(b"a"), block(b"b")])
    with pytest.raises(BadMagicError):
        read_archive(b"XXXX" + data[4:])
    with pytest.raises(UnsupportedVersionError):
        read_archive(data[:4] + struct.pack("<H", 2) + data[6:])
    with pytest.raises(DigestMismatchError):
        read_archive(data, bytes(32))
    with pytest.raises(TruncatedArchiveError):
        read_archive(data[:-1])
    with pytest.raises(TruncatedArchiveError):
        read_archive(data[:30])
    with pytest.raises(TruncatedArchiveError):
        read_archive(data[:2])
    with pytest.raises(ChecksumError):
        read_archive(data + b"\x00")
    assert data[:4] == MAGIC


def test_payload_flip_names_the_block():
    data = serialize_archive(header(), [block(b"a"), block(b"b")])
    base = parse_header(data).table_size
    first = sum(parse_header(data).blocks[0].lengths)
    for pos, expect in ((base, 0), (base + first, 1), (len(data) - 1, 1)):
        bad = bytearray(data)
        bad[pos] ^= 0x01
        with pytest.raises(ChecksumError) as err:
            read_archive(bytes(bad))
        assert err.value.block == expect


def test_every_single_byte_flip_detected(fixture_files):
    fa, _, archive = fixture_files
    ref = load_fasta(fa)
    h = parse_header(archive)
    # 60-byte fixed header, one entry per block, trailing table checksum
    assert h.table_size == 60 + 2 * BLOCK_ENTRY_SIZE + 8
    assert BLOCK_ENTRY_SIZE == 16 + 10 * 12 + 8
    ends = []
    acc = h.table_size
    for e in h.blocks:
        acc += sum(e.lengths)
        ends.append(acc)
    for pos in range(len(archive)):
        for mask in (0x01, 0x80, 0xFF):
            bad = bytearray(archive)
            bad[pos] ^= mask
            with pytest.raises(Exception) as err:
                decompress_archive(bytes(bad), ref)
            if pos >= h.table_size:
                blk = next(i for i, end in enumerate(ends) if pos < end)
                assert isinstance(err.value, ChecksumError) and err.value.block == blk


def test_fixture_archive_is_frozen(fixture_files):
    import sys
    sys.path.insert(0, str(DATA))
    from make_fixture import compress
    fa, fq, archive = fixture_files
    assert compress(fa, fq) == archive


def test_fixture_decodes_to_canonical_reads(fixture_files):
    fa, fq, archive = fixture_files
    ref = load_fasta(fa)
    reads = decompress_archive(archive, ref)
    assert [r.bases for r in reads] == [r.bases for r in parse_fastq(fq)]
    # the fixture exercises every outcome class and N bases
    index = build_index(ref)
    types = Counter(o.match_type for b in split_blocks(list(parse_fastq(fq)), 3000)
                    for o in align_block(b, index, ref, AlignerConfig()))
    assert set(types) == {0, 1, 2, UNMAPPED}
    assert any(b"N" in r.bases for r in reads)

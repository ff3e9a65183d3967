import pytest
from hypothesis import given
from hypothesis import strategies as st

from amgc.errors import FastqParseError
from amgc.fastq import ReadRecord, format_fastq, parse_fastq, reads_to_lines, split_blocks


def fq(*seqs):
    return b"".join(b"@r%d\n%s\n+\n%s\n" % (i, s, b"I" * len(s)) for i, s in enumerate(seqs))


def test_single_record():
    (rec,) = parse_fastq(fq(b"ACGT"))
    assert rec.bases == b"ACGT"
    assert rec.length == 4
    assert rec.ordinal == 0


def test_empty_input():
    assert list(parse_fastq(b"")) == []


def test_lowercase_normalized_against_line_split_oracle():
    data = fq(b"ACGTNACGTA", b"acgtacgtnn")
    oracle = [line.upper() for i, line in enumerate(data.split(b"\n")) if i % 4 == 1]
    assert [r.bases for r in parse_fastq(data)] == oracle
    assert [r.bases for r in parse_fastq(data)][1] == b"ACGTACGTNN"


@pytest.mark.parametrize("data, index", [
    (b"@a\nACGT\n+\nIIII\n@b\nACGT\n", 1),
    (b"@a\nACGT\n+\nIII\n", 0),
    (b"@a\nACGT\n+\nIIII\n@b\nACXT\n+\nIIII\n", 1),
    (b"@a\nAC-T\n+\nIIII\n", 0),
    (b"a\nACGT\n+\nIIII\n", 0),
])
def test_malformed_records_report_index(data, index):
    with pytest.raises(FastqParseError) as err:
        list(parse_fastq(data))
    assert err.value.record_index == index


def test_passthrough_keeps_identifier_and_quality():
    data = b"@id one\nacgt\n+\n#!AB\n"
    (rec,) = parse_fastq(data, passthrough=True)
    assert rec.identifier == b"@id one" and rec.quality == b"#!AB"
    assert format_fastq([rec]) == b"@id one\nACGT\n+\n#!AB\n"
    (plain,) = parse_fastq(data)
    assert plain.identifier is None


def test_accepts_line_iterables_and_crlf():
    lines = [b"@a\r\n", b"ACGT\r\n", b"+\r\n", b"IIII\r\n"]
    assert [r.bases for r in parse_fastq(lines)] == [b"ACGT"]


def reads(*lengths):
    return [ReadRecord(b"A" * n, i) for i, n in enumerate(lengths)]


def test_split_blocks_greedy_rule():
    # 100+100 = 200 < 250 stays open, the third read reaches 300 >= 250 and closes it
    blocks = list(split_blocks(reads(100, 100, 100, 100, 100), 250))
    assert [len(b) for b in blocks] == [3, 2]
    assert [b.raw_byte_budget for b in blocks] == [300, 200]
    assert [r.ordinal for r in blocks[1].reads] == [0, 1]


def test_split_blocks_degenerate_cases():
    assert [len(b) for b in split_blocks(reads(10, 20, 30), 10_000)] == [3]
    assert [len(b) for b in split_blocks(reads(42), 42)] == [1]
    assert list(split_blocks([], 100)) == []


@given(st.lists(st.integers(1, 50), max_size=60), st.integers(50, 400))
def test_split_blocks_is_a_partition(lengths, size):
    rs = [ReadRecord(b"C" * n, i) for i, n in enumerate(lengths)]
    blocks = list(split_blocks(rs, size))
    assert [r.bases for b in blocks for r in b.reads] == [r.bases for r in rs]
    for b in blocks[:-1]:
        assert b.raw_byte_budget >= size
        assert b.raw_byte_budget - b.reads[-1].length < size


@given(st.lists(st.text(alphabet="ACGTNacgtn", min_size=1, max_size=40), max_size=20))
def test_bases_roundtrip(seqs):
    raw = [s.encode() for s in seqs]
    parsed = list(parse_fastq(fq(*raw)))
    assert reads_to_lines(parsed) == b"".join(s.upper() + b"\n" for s in raw)

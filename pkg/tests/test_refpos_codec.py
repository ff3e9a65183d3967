import random
import statistics

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amgc.coder import RangeDecoder, RangeEncoder
from amgc.errors import CorruptStreamError, TruncatedStreamError
from amgc.refindex import ref_from_bases
from amgc.refpos_codec import (
    STREAMS, BitPlaneForm, BitPlaneModel, decode_refpos, decode_uint, dedup, encode_refpos, encode_uint,
    fixed_width_size, median_delta, median_undelta, undedup,
)
from amgc.simgen import ReadModel, generate, random_reference


def oracle_delta(p):
    """Direct formula: d(x) = p(x) - median of the three earlier values, zero padded."""
    padded = [0, 0, 0] + list(p)
    return [padded[i + 3] - statistics.median(padded[i:i + 3]) for i in range(len(p))]


def total(streams):
    return sum(len(streams[n]) for n in STREAMS)


@pytest.mark.parametrize("positions, bits, unique", [
    ([7, 7, 7], [0, 1, 1], [7]),
    ([5, 9, 9, 5], [0, 0, 1, 0], [5, 9, 5]),
    ([], [], []),
])
def test_dedup(positions, bits, unique):
    assert dedup(positions) == (bits, unique)
    assert undedup(bits, unique) == positions


def test_undedup_rejects_leading_one():
    with pytest.raises(CorruptStreamError):
        undedup([1], [])


@pytest.mark.parametrize("unique, deltas", [
    ([100, 105, 110, 108], [100, 105, 10, 3]),
    ([42], [42]),
    # median of the three earlier values trails by one step, so a steady stride of 10 yields 20
    ([10, 20, 30, 40, 50], [10, 20, 20, 20, 20]),
])
def test_median_delta_examples(unique, deltas):
    assert median_delta(unique) == deltas == oracle_delta(unique)
    assert median_undelta(deltas) == unique


def test_median_delta_random_against_oracle():
    rng = random.Random(7)
    for _ in range(2000):
        p = [rng.randrange(0, 1 << 32) for _ in range(rng.randrange(0, 12))]
        d = median_delta(p)
        assert d == oracle_delta(p)
        assert median_undelta(d) == p


@pytest.mark.parametrize("positions", [
    [100, 105, 110, 108], [], [0], [2**32 - 1], [0, 2**32 - 1, 0, 2**32 - 1], [3, 3, 3, 1, 1, 2**31],
])
def test_roundtrip_examples(positions):
    assert decode_refpos(encode_refpos(positions), len(positions)) == positions


@given(st.lists(st.integers(0, 2**32 - 1), max_size=200))
def test_roundtrip_property(positions):
    assert decode_refpos(encode_refpos(positions), len(positions)) == positions


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        encode_refpos([2**32])
    with pytest.raises(ValueError):
        encode_refpos([-1])


def test_identical_positions_tiny():
    streams = encode_refpos([9] * 10_000)
    assert total(streams) < 200
    assert decode_refpos(streams, 10_000) == [9] * 10_000


def test_empty_streams_are_empty():
    assert all(v == b"" for v in encode_refpos([]).values())


def test_bitplane_form_exhaustive():
    for v in range(1, 1 << 16):
        for s in (v, -v):
            f = BitPlaneForm.of(s)
            assert f.msb == v.bit_length() - 1
            assert 0 <= f.rest < 1 << f.msb
            assert f.negative == (s < 0)
            assert f.value() == s
    assert BitPlaneForm.of(0) == BitPlaneForm(True)


def test_bitplane_model_uint_roundtrip():
    values = [0, 1, 2, 3, 255, 256, 2**31 - 1, 2**32 - 1, 17, 0, 0]
    enc = RangeEncoder()
    m = BitPlaneModel()
    for v in values:
        encode_uint(m, enc, v)
    dec = RangeDecoder(enc.finish())
    m = BitPlaneModel()
    assert [decode_uint(m, dec) for _ in values] == values
    with pytest.raises(ValueError):
        encode_uint(BitPlaneModel(), RangeEncoder(), -1)
    with pytest.raises(ValueError):
        encode_uint(BitPlaneModel(), RangeEncoder(), 2**32)


def test_truncated_stream_raises():
    streams = encode_refpos([10, 1000, 500000, 77])
    streams["RestBit"] = b""
    with pytest.raises(TruncatedStreamError):
        decode_refpos(streams, 4)


def test_locally_linear_beats_uniform():
    ref = ref_from_bases(random_reference(1_000_000, np.random.default_rng(1)))
    corpus = generate(ref, ReadModel(count=20_000, error_rate=0.0), np.random.default_rng(2))
    linear = [r.refpos for r in corpus.reads]
    uniform = np.random.default_rng(3).integers(0, 1_000_000, len(linear)).tolist()
    a, b = total(encode_refpos(linear)), total(encode_refpos(uniform))
    assert a < b
    assert a < 0.5 * fixed_width_size(len(linear))

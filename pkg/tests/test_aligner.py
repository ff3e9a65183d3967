import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import split_demo_read, substitute, window
from amgc.aligner import (
    FULL, MISMATCHED, NO_SPLIT, SPLIT, UNMAPPED, AlignerConfig, SegmentMatch, SplitNode, UnmappedLeaf,
    align_block, align_segment, reconstruct, recursive_split_align,
)
from amgc.fastq import ReadBlock, ReadRecord
from amgc.refindex import decode_bases, encode_bases, reverse_complement
from amgc.residual_codec import tree_signature
from amgc.simgen import brute_force_align, random_reads

CFG = AlignerConfig()


def test_threshold_and_split_rule():
    assert CFG.threshold(100) == 10
    assert CFG.threshold(151) == 16
    assert CFG.threshold(38) == 4
    assert CFG.can_split(50) and not CFG.can_split(49)
    assert CFG.seed_offsets(100) == [0, 30, 60, 90]


def test_exact_window(small_ref, small_index):
    m = align_segment(window(small_ref, 1000, 100), small_index, small_ref, CFG)
    assert m.refpos == 1000 and not m.reverse and m.exact


def test_two_substitutions_match_brute_force(small_ref, small_index):
    read = substitute(window(small_ref, 4321, 100), [17, 63])
    m = align_segment(read, small_index, small_ref, AlignerConfig(mismatch_rate=0.03))
    oracle = brute_force_align(encode_bases(read), small_ref, threshold=3)
    assert m.refpos == oracle.refpos == 4321
    assert np.flatnonzero(m.mispos).tolist() == oracle.mismatches.tolist() == [17, 63]
    assert decode_bases(m.misvalues) == bytes(read[i] for i in (17, 63))


def test_reverse_complement(small_ref, small_index):
    codes = reverse_complement(small_ref.codes[7000:7120])
    assert align_segment(codes, small_index, small_ref, AlignerConfig(mismatch_rate=0)) is not None
    m = align_segment(codes, small_index, small_ref, CFG)
    oracle = brute_force_align(codes, small_ref, CFG)
    assert (m.refpos, m.reverse) == (oracle.refpos, oracle.reverse) == (7000, True)
    assert m.exact


def test_split_demo_tree(small_ref, small_index):
    out = recursive_split_align(split_demo_read(small_ref), small_index, small_ref, AlignerConfig(min_len=25))
    tree = out.tree
    assert isinstance(tree, SplitNode) and out.match_type == SPLIT
    assert isinstance(tree.left, SegmentMatch) and tree.left.length == 75 and tree.left.refpos == 5000
    assert isinstance(tree.right, SplitNode) and tree.right.length == 76
    assert isinstance(tree.right.left, SegmentMatch) and tree.right.left.length == 38
    assert tree.right.left.refpos == 5075
    assert isinstance(tree.right.right, UnmappedLeaf) and tree.right.right.length == 38
    assert tree_signature(tree) == ("fail", ("ok",), ("fail", ("ok",), ("fail-leaf",)))
    assert decode_bases(reconstruct(out, small_ref)) == split_demo_read(small_ref)


def test_whole_match_is_single_leaf(small_ref, small_index):
    out = recursive_split_align(window(small_ref, 300, 90), small_index, small_ref, CFG)
    assert isinstance(out.tree, SegmentMatch) and out.match_type == FULL


def test_short_random_read_is_single_unmapped_leaf(small_ref, small_index):
    read = random_reads(1, 49, np.random.default_rng(1))[0]
    out = recursive_split_align(read, small_index, small_ref, CFG)
    assert isinstance(out.tree, UnmappedLeaf) and out.match_type == UNMAPPED


def test_no_split_disables_recursion(small_ref, small_index):
    out = recursive_split_align(split_demo_read(small_ref), small_index, small_ref, AlignerConfig(min_len=NO_SPLIT))
    assert isinstance(out.tree, UnmappedLeaf)


def _leaf_lengths(node):
    if isinstance(node, SplitNode):
        return _leaf_lengths(node.left) + _leaf_lengths(node.right)
    return [node.length]


def test_split_length_arithmetic(small_ref, small_index):
    # a read of all N never aligns, so the tree shows the pure halving schedule
    def expected(m):
        return expected(m // 2) + expected(m - m // 2) if m // 2 >= 25 else [m]

    for n in range(2, 1001):
        out = recursive_split_align(np.full(n, 4, dtype=np.uint8), small_index, small_ref, CFG)
        lengths = _leaf_lengths(out.tree)
        assert sum(lengths) == n
        assert lengths == expected(n)
        assert n < 50 or all(x >= 25 for x in lengths)


def test_empty_block(small_ref, small_index):
    assert align_block(ReadBlock(()), small_index, small_ref, CFG) == []


def test_block_of_exact_reads(small_ref, small_index):
    block = ReadBlock(tuple(ReadRecord(window(small_ref, p, 100), i) for i, p in enumerate((10, 500, 9000))))
    outs = align_block(block, small_index, small_ref, CFG)
    assert [o.match_type for o in outs] == [FULL] * 3
    assert [o.tree.refpos for o in outs] == [10, 500, 9000]


def _brute_class(codes, ref):
    hit = brute_force_align(codes, ref, CFG)
    if hit is None:
        return None
    return FULL if hit.mismatches.size == 0 else MISMATCHED


def test_mixed_block_matches_brute_force(small_ref, small_index):
    rng = np.random.default_rng(5)
    reads = []
    for i in range(30):
        pos = int(rng.integers(0, small_ref.total_length - 100))
        w = window(small_ref, pos, 100)
        kind = i % 3
        reads.append(w if kind == 0 else substitute(w, [15, 77]) if kind == 1 else random_reads(1, 100, rng)[0])
    outs = align_block(ReadBlock(tuple(ReadRecord(r, i) for i, r in enumerate(reads))), small_index,
                      small_ref, AlignerConfig(min_len=NO_SPLIT))
    for read, out in zip(reads, outs):
        oracle = _brute_class(encode_bases(read), small_ref)
        assert out.match_type == (UNMAPPED if oracle is None else oracle)
    assert [o.match_type for o in outs[:3]] == [FULL, MISMATCHED, UNMAPPED]


def test_deterministic(small_ref, small_index):
    read = split_demo_read(small_ref, 800)
    a = recursive_split_align(read, small_index, small_ref, CFG)
    b = recursive_split_align(read, small_index, small_ref, CFG)
    assert a == b


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(30, 180), st.integers(0, 20), st.booleans())
def test_soundness_against_brute_force(small_ref, small_index, seed, n, errors, rc):
    rng = np.random.default_rng(seed)
    pos = int(rng.integers(0, small_ref.total_length - n))
    codes = small_ref.codes[pos:pos + n].copy()
    idx = rng.choice(n, min(errors, n), replace=False)
    codes[idx] = (codes[idx] + rng.integers(1, 4, idx.size)) % 4
    if rc:
        codes = reverse_complement(codes)
    m = align_segment(codes, small_index, small_ref, CFG)
    oracle = brute_force_align(codes, small_ref, CFG)
    if m is not None:
        assert oracle is not None
        assert m.mismatches <= CFG.threshold(n)
        assert m.mismatches >= oracle.mismatches.size
        assert np.array_equal(reconstruct(recursive_split_align(codes, small_index, small_ref, CFG), small_ref),
                              codes)


def test_n_counts_as_mismatch(small_ref, small_index):
    read = bytearray(window(small_ref, 2000, 100))
    read[50] = ord("N")
    m = align_segment(bytes(read), small_index, small_ref, CFG)
    assert m.refpos == 2000 and m.mispos[50] and m.mismatches == 1 and m.misvalues[0] == 4

"""Reference-based compression of FASTQ reads streams."""
from .aligner import AlignerConfig, MatchOutcome, SegmentMatch, align_block, align_segment, recursive_split_align
from .fastq import ReadBlock, ReadRecord, parse_fastq, split_blocks
from .pipeline import compress_reads, decompress_archive
from .refindex import KmerIndex, RefSequence, build_index, kmer_code, load_fasta

__version__ = "0.1.0"

__all__ = [
    "AlignerConfig", "KmerIndex", "MatchOutcome", "ReadBlock", "ReadRecord", "RefSequence",
    "SegmentMatch", "align_block", "align_segment", "build_index", "compress_reads",
    "decompress_archive", "kmer_code", "load_fasta", "parse_fastq", "recursive_split_align",
    "split_blocks",
]

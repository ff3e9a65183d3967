"""Distribution reports: position scatter, per-position mismatch histogram, stream breakdown."""
from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import container
from .aligner import MATCH_TYPE_NAMES, AlignerConfig, MatchOutcome, SegmentMatch, align_block, iter_leaves
from .container import ArchiveHeader, EncodedBlock
from .fastq import DEFAULT_BLOCK_SIZE, ReadRecord, split_blocks
from .pipeline import encode_outcomes
from .refindex import KmerIndex, RefSequence

CATEGORIES = {
    "PosEqual": "refpos", "Sign": "refpos", "MSB": "refpos", "RestBit": "refpos",
    "MisposBits": "mispos", "MisValues": "misvalue", "UnmapSeq": "unmapseq",
    "MatchMeta": "others", "NMask": "others", "Passthrough": "others",
}


@dataclass
class MisposHistogram:
    forward: np.ndarray
    reverse: np.ndarray  # reverse-strand errors indexed from the read's far end
    reverse_mirrored: np.ndarray  # reverse-strand errors in read order
    coverage: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.forward + self.reverse_mirrored


@dataclass
class StatsReport:
    scatter: list[tuple[int, int, int, str, str]] = field(default_factory=list)
    histogram: MisposHistogram | None = None
    stream_bytes: dict[str, int] = field(default_factory=dict)
    container_bytes: int = 0
    archive_bytes: int = 0


def mispos_histogram(reads_outcomes: Iterable[tuple[int, MatchOutcome]], max_len: int) -> MisposHistogram:
    fwd = np.zeros(max_len, dtype=np.int64)
    rev = np.zeros(max_len, dtype=np.int64)
    rev2 = np.zeros(max_len, dtype=np.int64)
    cov = np.zeros(max_len, dtype=np.int64)
    for length, out in reads_outcomes:
        offset = 0
        for leaf in iter_leaves(out.tree):
            if isinstance(leaf, SegmentMatch):
                cov[offset:offset + leaf.length] += 1
                hits = np.flatnonzero(leaf.mispos) + offset
                if leaf.reverse:
                    np.add.at(rev2, hits, 1)
                    np.add.at(rev, length - 1 - hits, 1)
                else:
                    np.add.at(fwd, hits, 1)
            offset += leaf.length
    return MisposHistogram(fwd, rev, rev2, cov)


def tail_rise(counts: Sequence[int] | np.ndarray, bins: int = 4) -> bool:
    """True when the last quartile, cut into ``bins`` equal bins, has strictly increasing bin totals."""
    counts = np.asarray(counts)
    n = counts.size
    tail = counts[n - n // 4:]
    usable = tail.size - tail.size % bins
    if usable < bins:
        return False
    sums = tail[tail.size - usable:].reshape(bins, -1).sum(axis=1)
    return bool(np.all(np.diff(sums) > 0))


def analyze(reads: Sequence[ReadRecord], ref: RefSequence, index: KmerIndex,
            config: AlignerConfig | None = None, block_size: int = DEFAULT_BLOCK_SIZE) -> StatsReport:
    config = config or AlignerConfig(k=index.k)
    report = StatsReport()
    encoded: list[EncodedBlock] = []
    pairs: list[tuple[int, MatchOutcome]] = []
    read_index = 0
    for block in split_blocks(reads, block_size):
        outcomes = align_block(block, index, ref, config)
        encoded.append(encode_outcomes(block, outcomes, ref, config.min_len))
        for out in outcomes:
            offset = 0
            for leaf in iter_leaves(out.tree):
                if isinstance(leaf, SegmentMatch):
                    # anchor: where the whole read would start if it followed this leaf's placement
                    before = out.read_length - offset - leaf.length if leaf.reverse else offset
                    report.scatter.append((read_index, leaf.refpos, leaf.refpos - before,
                                           "-" if leaf.reverse else "+", MATCH_TYPE_NAMES[out.match_type]))
                    break
                offset += leaf.length
            pairs.append((out.read_length, out))
            read_index += 1
    max_len = max((n for n, _ in pairs), default=0)
    report.histogram = mispos_histogram(pairs, max_len)
    header = ArchiveHeader(ref.digest, ref.total_length, index.k, config.min_len)
    archive = container.serialize_archive(header, encoded)
    report.stream_bytes = breakdown_from_blocks(encoded)
    report.archive_bytes = len(archive)
    report.container_bytes = len(archive) - sum(report.stream_bytes.values())
    return report


def breakdown_from_blocks(blocks: Iterable[EncodedBlock]) -> dict[str, int]:
    sizes = dict.fromkeys(container.STREAM_NAMES, 0)
    for blk in blocks:
        for name, data in blk.streams.items():
            sizes[name] += len(data)
    return sizes


def breakdown_from_archive(data: bytes) -> tuple[dict[str, int], int]:
    header = container.parse_header(data)
    sizes = dict.fromkeys(container.STREAM_NAMES, 0)
    for entry in header.blocks:
        for name, n in zip(container.STREAM_NAMES, entry.lengths):
            sizes[name] += n
    return sizes, len(data) - sum(sizes.values())


def write_breakdown_csv(path: Path, sizes: dict[str, int], container_bytes: int) -> None:
    total = sum(sizes.values()) + container_bytes
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["stream", "category", "bytes", "fraction"])
        for name, n in sizes.items():
            w.writerow([name, CATEGORIES[name], n, f"{n / total:.6f}" if total else "0"])
        w.writerow(["container", "others", container_bytes, f"{container_bytes / total:.6f}" if total else "0"])


def write_report(report: StatsReport, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    scatter = outdir / "refpos_scatter.csv"
    with open(scatter, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["read_index", "refpos", "anchor", "strand", "match_type"])
        w.writerows(report.scatter)
    hist = outdir / "mispos_hist.csv"
    h = report.histogram
    with open(hist, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "forward", "reverse", "reverse_mirrored", "total", "coverage"])
        if h is not None:
            for i in range(h.forward.size):
                w.writerow([i, h.forward[i], h.reverse[i], h.reverse_mirrored[i], h.total[i], h.coverage[i]])
    breakdown = outdir / "stream_breakdown.csv"
    write_breakdown_csv(breakdown, report.stream_bytes, report.container_bytes)
    return [scatter, hist, breakdown]

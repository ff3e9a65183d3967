"""Synthetic corpora and brute-force oracles.

The read model mimics what short-read runs look like when mapped back to a
reference: start positions creep forward locally with occasional PCR
duplicates and far jumps, substitution errors follow a per-position curve
that dips slightly and then climbs towards the 3' end, and each read draws
its own quality multiplier so that bad reads carry clusters of errors.
"""
from __future__ import annotations

import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .aligner import AlignerConfig
from .fastq import ReadRecord
from .refindex import RefSequence, decode_bases, reverse_complement

ERROR_PROFILES = ("tail", "flat", "none", "burst")
# gamma shape 1/16: most reads come out nearly clean, a minority carry most errors
DEFAULT_DISPERSION = 16.0


def entropy_bound(histogram: Mapping[object, int] | Sequence[int]) -> float:
    """Shannon bound in bits for coding every counted symbol: sum -c*log2(c/total)."""
    counts = list(histogram.values()) if isinstance(histogram, Mapping) else list(histogram)
    if not counts:
        raise ValueError("empty histogram")
    if any(c < 0 for c in counts):
        raise ValueError("negative count")
    total = sum(counts)
    return -sum(c * math.log2(c / total) for c in counts if c > 0)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def random_reference(length: int, rng: np.random.Generator, n_runs: int = 0, n_run_length: int = 20) -> bytes:
    seq = np.frombuffer(b"ACGT", dtype=np.uint8)[rng.integers(0, 4, length)].copy()
    for _ in range(n_runs):
        start = int(rng.integers(0, max(1, length - n_run_length)))
        seq[start:start + n_run_length] = ord("N")
    return seq.tobytes()


def fasta_bytes(seq: bytes, name: str = "ref", width: int = 60) -> bytes:
    lines = [b">" + name.encode()]
    lines += [seq[i:i + width] for i in range(0, len(seq), width)]
    return b"\n".join(lines) + b"\n"


def tail_error_curve(length: int, mean_rate: float) -> np.ndarray:
    """Per-position substitution probability: slight early decline, then a rise over the tail."""
    t = np.linspace(0.0, 1.0, length) if length > 1 else np.zeros(1)
    shape = 1.0 - 0.3 * t + 12.0 * np.clip(t - 0.55, 0.0, None) ** 2
    return shape * (mean_rate / shape.mean())


def burst_error_curve(length: int, burst_rate: float = 0.5, clean_rate: float = 0.0) -> np.ndarray:
    """Clean first two thirds, dense substitutions over the final third."""
    curve = np.full(length, clean_rate)
    curve[(2 * length) // 3:] = burst_rate
    return curve


@dataclass
class ReadModel:
    read_length: int = 100
    count: int = 1000
    mean_step: float = 8.0
    duplicate_rate: float = 0.1
    jump_rate: float = 0.01
    rc_fraction: float = 0.0
    error_profile: str = "tail"
    error_rate: float = 0.01
    quality_dispersion: float = DEFAULT_DISPERSION
    n_rate: float = 0.0
    min_length: int | None = None  # when set, lengths are uniform in [min_length, read_length]
    start: int | None = None

    def validate(self, ref_length: int) -> None:
        for name in ("duplicate_rate", "jump_rate", "rc_fraction", "n_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.error_profile not in ERROR_PROFILES:
            raise ValueError(f"error_profile must be one of {ERROR_PROFILES}")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must lie in [0, 1]")
        if self.read_length < 1 or self.count < 0 or self.mean_step < 0:
            raise ValueError("read_length >= 1, count >= 0 and mean_step >= 0 required")
        if self.quality_dispersion < 0:
            raise ValueError("quality_dispersion must be >= 0")
        lo = self.read_length if self.min_length is None else self.min_length
        if not 1 <= lo <= self.read_length:
            raise ValueError("min_length must lie in [1, read_length]")
        if self.read_length > ref_length:
            raise ValueError("read_length exceeds reference length")

    def curve(self, length: int) -> np.ndarray:
        if self.error_profile == "none" or self.error_rate == 0.0:
            return np.zeros(length)
        if self.error_profile == "flat":
            return np.full(length, self.error_rate)
        if self.error_profile == "burst":
            return burst_error_curve(length, self.error_rate)
        return tail_error_curve(length, self.error_rate)


@dataclass
class SimRead:
    bases: bytes
    refpos: int
    reverse: bool
    errors: np.ndarray  # bool per read position
    jumped: bool = False
    duplicate: bool = False


@dataclass
class SimCorpus:
    reads: list[SimRead] = field(default_factory=list)

    def records(self) -> list[ReadRecord]:
        return [ReadRecord(r.bases, i) for i, r in enumerate(self.reads)]

    def fastq(self) -> bytes:
        out = bytearray()
        for i, r in enumerate(self.reads):
            out += b"@sim.%d pos=%d strand=%s\n" % (i, r.refpos, b"-" if r.reverse else b"+")
            out += r.bases + b"\n+\n" + b"I" * len(r.bases) + b"\n"
        return bytes(out)


def _substitute(codes: np.ndarray, mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    out = codes.copy()
    idx = np.flatnonzero(mask)
    if idx.size:
        # shift by 1..3 guarantees a different base
        out[idx] = (out[idx] + rng.integers(1, 4, idx.size)) % 4
    return out


def generate(ref: RefSequence, model: ReadModel, rng: np.random.Generator) -> SimCorpus:
    """Draw ``model.count`` reads from ``ref``; deterministic for a given generator state."""
    model.validate(ref.total_length)
    n_ref = ref.total_length
    lo_len = model.read_length if model.min_length is None else model.min_length
    pos = model.start if model.start is not None else int(rng.integers(0, max(1, n_ref // 4)))
    prev_start = None
    corpus = SimCorpus()
    for _ in range(model.count):
        length = int(rng.integers(lo_len, model.read_length + 1))
        span = n_ref - length
        duplicate = prev_start is not None and rng.random() < model.duplicate_rate
        jumped = False
        if duplicate:
            start = min(prev_start, span)
        elif rng.random() < model.jump_rate:
            start = int(rng.integers(0, span + 1))
            jumped = True
        else:
            if prev_start is not None:
                pos += int(rng.poisson(model.mean_step))
            if pos > span:
                pos = int(rng.integers(0, max(1, span // 8) + 1))
            start = pos
        if not jumped:
            prev_start = start
        reverse = rng.random() < model.rc_fraction
        window = ref.codes[start:start + length]
        codes = reverse_complement(window) if reverse else window.copy()
        curve = model.curve(length)
        if model.quality_dispersion > 0 and curve.any():
            shape = 1.0 / model.quality_dispersion
            curve = np.clip(curve * rng.gamma(shape, 1.0 / shape), 0.0, 1.0)
        errors = rng.random(length) < curve
        codes = _substitute(codes, errors, rng)
        if model.n_rate > 0:
            nmask = rng.random(length) < model.n_rate
            codes[nmask] = 4
            errors = errors | nmask
        corpus.reads.append(SimRead(decode_bases(codes), start, reverse, errors, jumped, duplicate))
    return corpus


def random_reads(count: int, length: int, rng: np.random.Generator) -> list[bytes]:
    return [decode_bases(rng.integers(0, 4, length).astype(np.uint8)) for _ in range(count)]


_BRUTE_CHUNK = 1 << 22  # compared bases per slice, keeps memory flat on long references


@dataclass(frozen=True)
class BruteForceHit:
    refpos: int
    reverse: bool
    mismatches: np.ndarray  # read positions (read order) that differ


def brute_force_align(read: np.ndarray, ref: RefSequence, config: AlignerConfig | None = None,
                      threshold: int | None = None) -> BruteForceHit | None:
    """Exhaustive best placement over every reference offset and both strands.

    Same ranking as the seeded aligner: fewest mismatches, then smallest
    refpos, then forward strand.  Returns None when even the best placement
    exceeds the threshold.
    """
    if threshold is None:
        threshold = (config or AlignerConfig()).threshold(read.size)
    n = read.size
    if n > ref.total_length or n == 0:
        return None
    windows = np.lib.stride_tricks.sliding_window_view(ref.codes, n)
    rows = max(1, _BRUTE_CHUNK // n)
    best = None
    for strand, seq in ((0, read), (1, reverse_complement(read))):
        for lo in range(0, windows.shape[0], rows):
            mism = np.count_nonzero(windows[lo:lo + rows] != seq, axis=1)
            i = int(np.argmin(mism))
            cand = (int(mism[i]), lo + i, strand)
            if best is None or cand < best:
                best = cand
    if best[0] > threshold:
        return None
    mm, pos, strand = best
    target = ref.codes[pos:pos + n]
    if strand:
        target = reverse_complement(target)
    return BruteForceHit(pos, bool(strand), np.flatnonzero(read != target))


def symbol_histogram(symbols) -> Counter:
    return Counter(symbols)

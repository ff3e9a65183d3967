"""Reference loading and the integer-mapped k-mer index used for seeding."""
from __future__ import annotations

import hashlib
import struct
from collections.abc import Iterable
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import FastaLoadError, IndexCacheError

DEFAULT_K = 10
DEFAULT_MAX_HITS = 16
MIN_K, MAX_K = 8, 14

BASES = b"ACGT"
# byte -> 2-bit code; 4 marks anything that is not A/C/G/T
_CODE = np.full(256, 4, dtype=np.uint8)
for _i, _b in enumerate(BASES):
    _CODE[_b] = _i
    _CODE[ord(chr(_b).lower())] = _i
_CODE[ord("N")] = 4
_CODE[ord("n")] = 4
_SYMBOL = np.frombuffer(b"ACGTN", dtype=np.uint8)
_COMPLEMENT = np.array([3, 2, 1, 0, 4], dtype=np.uint8)


def encode_bases(seq: bytes) -> np.ndarray:
    """ACGTN bytes -> uint8 codes 0..4."""
    return _CODE[np.frombuffer(seq, dtype=np.uint8)]


def decode_bases(codes: np.ndarray) -> bytes:
    return _SYMBOL[codes].tobytes()


def reverse_complement(codes: np.ndarray) -> np.ndarray:
    return _COMPLEMENT[codes[::-1]]


@dataclass(frozen=True, eq=False)
class RefSequence:
    """Concatenated reference.  ``codes`` is canonical (non-ACGT stored as A=0)."""

    codes: np.ndarray
    valid_mask: np.ndarray

    @property
    def total_length(self) -> int:
        return int(self.codes.size)

    def __len__(self) -> int:
        return int(self.codes.size)

    @property
    def packed_bases(self) -> bytes:
        """Two bits per base, first base in the high bits of each byte."""
        n = self.codes.size
        padded = np.zeros((n + 3) // 4 * 4, dtype=np.uint8)
        padded[:n] = self.codes
        quads = padded.reshape(-1, 4)
        packed = (quads[:, 0] << 6) | (quads[:, 1] << 4) | (quads[:, 2] << 2) | quads[:, 3]
        return packed.astype(np.uint8).tobytes()

    @cached_property
    def digest(self) -> bytes:
        """SHA-256 over the base count and the packed canonical bases."""
        h = hashlib.sha256()
        h.update(struct.pack("<Q", self.total_length))
        h.update(self.packed_bases)
        return h.digest()

    def window(self, start: int, length: int) -> np.ndarray:
        return self.codes[start:start + length]


def ref_from_bases(seq: bytes) -> RefSequence:
    raw = encode_bases(seq.upper())
    valid = raw < 4
    codes = np.where(valid, raw, 0).astype(np.uint8)
    return RefSequence(codes, valid)


def load_fasta(data: bytes | Iterable[bytes]) -> RefSequence:
    """Concatenate every sequence of a FASTA file in file order."""
    lines = data.splitlines() if isinstance(data, (bytes, bytearray)) else data
    chunks: list[bytes] = []
    seen_header = False
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith(b">"):
            seen_header = True
            continue
        if line.startswith(b";"):
            continue
        if not seen_header:
            raise FastaLoadError("sequence data before the first '>' header")
        chunks.append(line)
    if not chunks:
        raise FastaLoadError("no sequence lines in FASTA input")
    return ref_from_bases(b"".join(chunks))


def load_fasta_path(path: str | Path) -> RefSequence:
    with open(path, "rb") as fh:
        return load_fasta(fh)


def kmer_code(bases: bytes | str, k: int | None = None) -> int | None:
    """Base-4 integer of a k-mer (A=0, C=1, G=2, T=3); None if it holds a non-ACGT symbol."""
    if isinstance(bases, str):
        bases = bases.encode()
    if k is not None and len(bases) != k:
        raise ValueError(f"expected {k} bases, got {len(bases)}")
    code = 0
    for b in bases:
        digit = _CODE[b]
        if digit > 3:
            return None
        code = (code << 2) | int(digit)
    return code


def kmer_decode(code: int, k: int) -> bytes:
    out = bytearray(k)
    for i in range(k - 1, -1, -1):
        out[i] = BASES[code & 3]
        code >>= 2
    return bytes(out)


def window_codes(codes: np.ndarray, k: int) -> np.ndarray:
    """k-mer code of every length-k window of a 0..3 code array (int64)."""
    n = codes.size - k + 1
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    out = np.zeros(n, dtype=np.int64)
    c = codes.astype(np.int64)
    for j in range(k):
        out = (out << 2) | c[j:j + n]
    return out


@dataclass(frozen=True, eq=False)
class KmerIndex:
    """CSR-style map: ``keys`` (sorted distinct codes) -> ``positions[offsets[i]:offsets[i+1]]``."""

    k: int
    max_hits_per_kmer: int
    keys: np.ndarray
    offsets: np.ndarray
    positions: np.ndarray

    def lookup(self, code: int) -> np.ndarray:
        i = int(np.searchsorted(self.keys, code))
        if i < self.keys.size and self.keys[i] == code:
            return self.positions[self.offsets[i]:self.offsets[i + 1]]
        return self.positions[:0]

    @property
    def entries(self) -> dict[int, list[int]]:
        return {
            int(key): self.positions[self.offsets[i]:self.offsets[i + 1]].tolist()
            for i, key in enumerate(self.keys)
        }

    def __len__(self) -> int:
        return int(self.keys.size)


def build_index(ref: RefSequence, k: int = DEFAULT_K, max_hits_per_kmer: int = DEFAULT_MAX_HITS) -> KmerIndex:
    if not MIN_K <= k <= MAX_K:
        raise ValueError(f"k must lie in [{MIN_K}, {MAX_K}]")
    if max_hits_per_kmer < 1:
        raise ValueError("max_hits_per_kmer must be >= 1")
    codes = window_codes(ref.codes, k)
    n = codes.size
    if n == 0:
        empty = np.zeros(0, dtype=np.int64)
        return KmerIndex(k, max_hits_per_kmer, empty, np.zeros(1, dtype=np.int64), empty.astype(np.uint32))
    bad = np.concatenate(([0], np.cumsum(~ref.valid_mask, dtype=np.int64)))
    ok = (bad[k:k + n] - bad[:n]) == 0
    pos = np.flatnonzero(ok)
    codes = codes[pos]
    order = np.argsort(codes, kind="stable")
    codes = codes[order]
    pos = pos[order]
    keys, first, counts = np.unique(codes, return_index=True, return_counts=True)
    # rank of each entry within its key run; keep the earliest max_hits
    rank = np.arange(codes.size) - np.repeat(first, counts)
    keep = rank < max_hits_per_kmer
    kept = np.minimum(counts, max_hits_per_kmer)
    offsets = np.concatenate(([0], np.cumsum(kept))).astype(np.int64)
    return KmerIndex(k, max_hits_per_kmer, keys.astype(np.int64), offsets, pos[keep].astype(np.uint32))


def lookup(index: KmerIndex, code: int) -> list[int]:
    return index.lookup(code).tolist()


_CACHE_MAGIC = b"AMGCIDX\x00"
_CACHE_VERSION = 1


def save_index(index: KmerIndex, digest: bytes, path: str | Path) -> None:
    """Write a versioned index cache bound to a reference digest."""
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<HBxI32sQQ", _CACHE_VERSION, index.k, index.max_hits_per_kmer,
                             digest, index.keys.size, index.positions.size))
        fh.write(index.keys.astype("<i8").tobytes())
        fh.write(index.offsets.astype("<i8").tobytes())
        fh.write(index.positions.astype("<u4").tobytes())


def load_index(path: str | Path, digest: bytes, k: int, max_hits_per_kmer: int) -> KmerIndex:
    """Load a cached index; raises IndexCacheError if it is stale or malformed."""
    data = Path(path).read_bytes()
    head = struct.calcsize("<HBxI32sQQ")
    if len(data) < 8 + head or data[:8] != _CACHE_MAGIC:
        raise IndexCacheError("not an index cache file")
    version, ck, cap, cdigest, nkeys, npos = struct.unpack_from("<HBxI32sQQ", data, 8)
    if version != _CACHE_VERSION:
        raise IndexCacheError(f"unsupported index cache version {version}")
    if cdigest != digest:
        raise IndexCacheError("index cache built for a different reference")
    if ck != k or cap != max_hits_per_kmer:
        raise IndexCacheError("index cache built with different k / hit cap")
    off = 8 + head
    need = off + 8 * nkeys + 8 * (nkeys + 1) + 4 * npos
    if len(data) != need:
        raise IndexCacheError("index cache has wrong size")
    keys = np.frombuffer(data, "<i8", nkeys, off).astype(np.int64)
    off += 8 * nkeys
    offsets = np.frombuffer(data, "<i8", nkeys + 1, off).astype(np.int64)
    off += 8 * (nkeys + 1)
    positions = np.frombuffer(data, "<u4", npos, off).astype(np.uint32)
    return KmerIndex(ck, cap, keys, offsets, positions)


def index_for(ref: RefSequence, k: int = DEFAULT_K, max_hits_per_kmer: int = DEFAULT_MAX_HITS,
              cache_path: str | Path | None = None) -> KmerIndex:
    """Build an index, going through the on-disk cache when a path is given."""
    if cache_path is not None and Path(cache_path).exists():
        try:
            return load_index(cache_path, ref.digest, k, max_hits_per_kmer)
        except IndexCacheError:
            pass
    index = build_index(ref, k, max_hits_per_kmer)
    if cache_path is not None:
        save_index(index, ref.digest, cache_path)
    return index

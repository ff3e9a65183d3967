"""Command-line front end: compress, decompress, stats, gen, genref."""
from __future__ import annotations

import argparse
import resource
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import simgen, stats
from .aligner import NO_SPLIT, AlignerConfig
from .errors import AmgcError
from .fastq import DEFAULT_BLOCK_SIZE, format_fastq, parse_fastq, reads_to_lines
from .pipeline import compress_reads, decompress_archive, default_threads
from .refindex import DEFAULT_K, DEFAULT_MAX_HITS, index_for, load_fasta_path

EXIT_USAGE = 2
EXIT_IO = 13


def _add_aligner_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=DEFAULT_K, help="seed k-mer length (8-14)")
    p.add_argument("--min-len", type=int, default=25, help="shortest half a failed segment may be split into")
    p.add_argument("--no-split", action="store_true", help="disable recursive split matching")
    p.add_argument("--mismatch-rate", type=str, default="0.1",
                   help="allowed mismatches per base; threshold is ceil(rate * length)")
    p.add_argument("--seeds", type=int, default=4)
    p.add_argument("--max-candidates", type=int, default=16, help="index hits examined per seed")
    p.add_argument("--max-hits", type=int, default=DEFAULT_MAX_HITS, help="positions stored per k-mer")
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE, help="read-block size in base bytes")
    p.add_argument("--index-cache", type=Path, help="on-disk k-mer index cache file")


def _config(args: argparse.Namespace) -> AlignerConfig:
    return AlignerConfig(
        k=args.k, num_seeds=args.seeds, mismatch_rate=Fraction(args.mismatch_rate),
        min_len=NO_SPLIT if args.no_split else args.min_len, max_candidates_per_seed=args.max_candidates,
    )


def _peak_rss_mb() -> float:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0


def cmd_compress(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    config = _config(args)
    ref = load_fasta_path(args.reference)
    index = index_for(ref, config.k, args.max_hits, args.index_cache)
    with open(args.input, "rb") as fh:
        reads = list(parse_fastq(fh, passthrough=args.passthrough))
    result = compress_reads(reads, ref, index, config, args.block_size,
                            threads=args.threads or default_threads(), passthrough=args.passthrough)
    args.output.write_bytes(result.archive)
    elapsed = time.perf_counter() - t0
    out = sys.stdout
    print(f"reads            {len(reads)}", file=out)
    print(f"original_bytes   {result.original_bytes}", file=out)
    print(f"compressed_bytes {len(result.archive)}", file=out)
    print(f"ratio            {result.ratio:.4f}", file=out)
    for name, n in result.stream_sizes().items():
        print(f"  {name:<12} {n}", file=out)
    print(f"wall_seconds     {elapsed:.3f}", file=out)
    print(f"peak_rss_mb      {_peak_rss_mb():.1f}", file=out)
    return 0


def cmd_decompress(args: argparse.Namespace) -> int:
    ref = load_fasta_path(args.reference)
    reads = decompress_archive(args.input.read_bytes(), ref)
    has_meta = reads and reads[0].identifier is not None
    data = format_fastq(reads) if has_meta and not args.bases_only else reads_to_lines(reads)
    args.output.write_bytes(data)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    if args.archive is not None:
        sizes, overhead = stats.breakdown_from_archive(args.archive.read_bytes())
        args.outdir.mkdir(parents=True, exist_ok=True)
        stats.write_breakdown_csv(args.outdir / "stream_breakdown.csv", sizes, overhead)
        return 0
    if args.input is None or args.reference is None:
        raise SystemExit("stats needs -i/-r, or -a for an existing archive")
    config = _config(args)
    ref = load_fasta_path(args.reference)
    index = index_for(ref, config.k, args.max_hits, args.index_cache)
    with open(args.input, "rb") as fh:
        reads = list(parse_fastq(fh))
    report = stats.analyze(reads, ref, index, config, args.block_size)
    for path in stats.write_report(report, args.outdir):
        print(path)
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    ref = load_fasta_path(args.reference)
    model = simgen.ReadModel(
        read_length=args.length, count=args.count, mean_step=args.step, duplicate_rate=args.dup_rate,
        jump_rate=args.jump_rate, rc_fraction=args.rc_fraction, error_profile=args.error_profile,
        error_rate=args.error_rate, quality_dispersion=args.dispersion, n_rate=args.n_rate,
        min_length=args.min_length,
    )
    corpus = simgen.generate(ref, model, np.random.default_rng(args.seed))
    args.output.write_bytes(corpus.fastq())
    return 0


def cmd_genref(args: argparse.Namespace) -> int:
    seq = simgen.random_reference(args.length, np.random.default_rng(args.seed), n_runs=args.n_runs)
    args.output.write_bytes(simgen.fasta_bytes(seq))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amgc", description="Reference-based compressor for FASTQ reads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compress", help="compress the reads of a FASTQ file")
    p.add_argument("-i", "--input", type=Path, required=True)
    p.add_argument("-r", "--reference", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--threads", type=int, default=0, help="worker processes (default: logical cores)")
    p.add_argument("--passthrough", action="store_true",
                   help="store identifier and quality lines verbatim alongside")
    _add_aligner_flags(p)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("decompress", help="restore the reads stream")
    p.add_argument("-i", "--input", type=Path, required=True)
    p.add_argument("-r", "--reference", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--bases-only", action="store_true", help="ignore stored identifier/quality lines")
    p.set_defaults(func=cmd_decompress)

    p = sub.add_parser("stats", help="write refpos/mispos/stream-size CSVs")
    p.add_argument("-i", "--input", type=Path)
    p.add_argument("-r", "--reference", type=Path)
    p.add_argument("-a", "--archive", type=Path, help="only report the stream breakdown of an archive")
    p.add_argument("-o", "--outdir", type=Path, required=True)
    _add_aligner_flags(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("gen", help="simulate reads from a reference")
    p.add_argument("-r", "--reference", type=Path, required=True)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--length", type=int, default=100)
    p.add_argument("--min-length", type=int, default=None, help="draw lengths uniformly from [min, length]")
    p.add_argument("--step", type=float, default=8.0, help="mean forward step between read starts")
    p.add_argument("--dup-rate", type=float, default=0.1)
    p.add_argument("--jump-rate", type=float, default=0.01)
    p.add_argument("--rc-fraction", type=float, default=0.0)
    p.add_argument("--error-profile", choices=simgen.ERROR_PROFILES, default="tail")
    p.add_argument("--error-rate", type=float, default=0.01)
    p.add_argument("--dispersion", type=float, default=simgen.DEFAULT_DISPERSION,
                   help="per-read error-rate dispersion (0 = identical rate for every read)")
    p.add_argument("--n-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("genref", help="write a random reference FASTA")
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--length", type=int, default=100_000)
    p.add_argument("--n-runs", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_genref)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AmgcError as exc:
        print(f"amgc: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, ZeroDivisionError) as exc:
        print(f"amgc: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"amgc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

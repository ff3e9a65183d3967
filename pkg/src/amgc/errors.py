"""Exception hierarchy.  Each class carries the CLI exit code for its error class."""
from __future__ import annotations


class AmgcError(Exception):
    exit_code = 1


class FastqParseError(AmgcError):
    exit_code = 3

    def __init__(self, message: str, record_index: int | None = None) -> None:
        if record_index is not None:
            message = f"record {record_index}: {message}"
        super().__init__(message)
        self.record_index = record_index


class FastaLoadError(AmgcError):
    exit_code = 4


class StreamError(AmgcError):
    exit_code = 5


class TruncatedStreamError(StreamError):
    pass


class CorruptStreamError(StreamError):
    pass


class ArchiveError(AmgcError):
    exit_code = 6


class BadMagicError(ArchiveError):
    exit_code = 7


class UnsupportedVersionError(ArchiveError):
    exit_code = 8


class DigestMismatchError(ArchiveError):
    exit_code = 9


class ChecksumError(ArchiveError):
    exit_code = 10

    def __init__(self, message: str, block: int | None = None) -> None:
        super().__init__(message)
        self.block = block


class TruncatedArchiveError(ArchiveError):
    exit_code = 11


class IndexCacheError(AmgcError):
    exit_code = 12

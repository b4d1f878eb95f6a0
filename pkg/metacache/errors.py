"""
Exception hierarchy for MetaCache.

Every error carries a stable ``code`` (used in HTTP payloads, CLI output and
reports) and an ``exit_code`` for the command line tool.
"""


class MetaCacheError(Exception):
    """Base class for all MetaCache errors."""

    code = "METACACHE_ERROR"
    exit_code = 1


class InvalidNameError(MetaCacheError):
    code = "INVALID_NAME"
    exit_code = 2


class InvalidParentError(MetaCacheError):
    code = "INVALID_PARENT"
    exit_code = 2


class InvalidInodeError(MetaCacheError):
    code = "INVALID_INODE"
    exit_code = 2


class InvalidConfigError(MetaCacheError):
    code = "INVALID_CONFIG"
    exit_code = 2


class CorruptValueError(MetaCacheError):
    code = "CORRUPT_VALUE"
    exit_code = 3


class CorruptTableError(MetaCacheError):
    code = "CORRUPT_TABLE"
    exit_code = 3


class StoreIOError(MetaCacheError):
    code = "IO_ERROR"
    exit_code = 4


class SeqGapError(MetaCacheError):
    code = "SEQ_GAP"
    exit_code = 5


class UnsortedInputError(MetaCacheError):
    code = "UNSORTED_INPUT"
    exit_code = 5


class FrozenMemTableError(MetaCacheError):
    code = "FROZEN_MEMTABLE"
    exit_code = 5


class InlineTooLargeError(MetaCacheError):
    code = "INLINE_TOO_LARGE"
    exit_code = 6


class NotFoundError(MetaCacheError):
    code = "NOT_FOUND"
    exit_code = 7


class IsDirectoryError(MetaCacheError):
    code = "IS_DIRECTORY"
    exit_code = 7


class InvalidSpecError(MetaCacheError):
    code = "INVALID_SPEC"
    exit_code = 8


class MalformedTraceError(MetaCacheError):
    code = "MALFORMED_TRACE"
    exit_code = 9


class TraceMismatchError(MetaCacheError):
    code = "TRACE_MISMATCH"
    exit_code = 10

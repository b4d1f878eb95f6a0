"""
RAM-resident sorted write buffer.
"""

import bisect
from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from metacache.config import DEFAULT_MEMTABLE_THRESHOLD_BYTES
from metacache.errors import FrozenMemTableError
from metacache.model.codec import ValueRecord, encode_value
from metacache.model.keys import PathKey


class InsertOutcome(Enum):
    OK = "ok"
    OK_THRESHOLD_REACHED = "ok_threshold_reached"


def entry_size(key: PathKey, value: ValueRecord) -> int:
    return len(key.encoded) + len(encode_value(value))


class MemTable:
    """
    Sorted map PathKey -> ValueRecord with encoded-size accounting.

    Keys are kept in a sorted list next to the dict; tombstones are ordinary
    values here.
    """

    def __init__(self, threshold_bytes: int = DEFAULT_MEMTABLE_THRESHOLD_BYTES):
        self.threshold_bytes = threshold_bytes
        self.approx_bytes = 0
        self._entries: Dict[PathKey, ValueRecord] = {}
        self._sizes: Dict[PathKey, int] = {}
        self._keys: List[bytes] = []
        self._by_encoding: Dict[bytes, PathKey] = {}
        self.frozen = False

    def __len__(self) -> int:
        return len(self._entries)

    def insert(self, key: PathKey, value: ValueRecord) -> InsertOutcome:
        """
        Insert or overwrite.

        Returns:
            OK_THRESHOLD_REACHED iff approx_bytes exceeds the threshold afterwards

        Raises:
            FrozenMemTableError: If the table was frozen
        """
        if self.frozen:
            raise FrozenMemTableError("insert into a frozen MemTable")
        size = entry_size(key, value)
        old = self._sizes.get(key)
        if old is None:
            bisect.insort(self._keys, key.encoded)
            self._by_encoding[key.encoded] = key
        else:
            self.approx_bytes -= old
        self._entries[key] = value
        self._sizes[key] = size
        self.approx_bytes += size
        if self.approx_bytes > self.threshold_bytes:
            return InsertOutcome.OK_THRESHOLD_REACHED
        return InsertOutcome.OK

    def get(self, key: PathKey) -> Optional[ValueRecord]:
        """Newest value for key (possibly a tombstone), or None if never written."""
        return self._entries.get(key)

    def items(self) -> Iterator[Tuple[PathKey, ValueRecord]]:
        for encoded in self._keys:
            key = self._by_encoding[encoded]
            yield key, self._entries[key]

    def range(self, low: bytes, high: bytes) -> Iterator[Tuple[PathKey, ValueRecord]]:
        """Entries with low <= encoded key < high, in key order."""
        start = bisect.bisect_left(self._keys, low)
        stop = bisect.bisect_left(self._keys, high)
        for encoded in self._keys[start:stop]:
            key = self._by_encoding[encoded]
            yield key, self._entries[key]

    def freeze(self) -> List[Tuple[PathKey, ValueRecord]]:
        """Make the table immutable and return all entries in key order."""
        self.frozen = True
        return list(self.items())

    def thaw(self) -> None:
        """Accept inserts again after a flush of this table failed."""
        self.frozen = False


def mt_insert(mt: MemTable, key: PathKey, value: ValueRecord) -> InsertOutcome:
    return mt.insert(key, value)


def mt_get(mt: MemTable, key: PathKey) -> Optional[ValueRecord]:
    return mt.get(key)


def mt_freeze(mt: MemTable) -> List[Tuple[PathKey, ValueRecord]]:
    return mt.freeze()

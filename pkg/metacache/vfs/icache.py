"""
VFS inode cache: a strict LRU of positive lookups.
"""

from collections import OrderedDict
from typing import List, Optional

from metacache.model.keys import PathKey
from metacache.storage.store import StoredInode


class ICache:
    """Bounded LRU map PathKey -> StoredInode. Capacity 0 caches nothing."""

    def __init__(self, capacity: int = 1024):
        self.capacity = capacity
        self._entries: "OrderedDict[PathKey, StoredInode]" = OrderedDict()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: PathKey) -> bool:
        return key in self._entries

    def get(self, key: PathKey) -> Optional[StoredInode]:
        record = self._entries.get(key)
        if record is not None:
            self._entries.move_to_end(key)
        return record

    def put(self, key: PathKey, record: StoredInode) -> None:
        if self.capacity == 0:
            return
        self._entries[key] = record
        self._entries.move_to_end(key)
        while len(self._entries) > self.capacity:
            self._entries.popitem(last=False)

    def invalidate(self, key: PathKey) -> None:
        self._entries.pop(key, None)

    def keys_lru_order(self) -> List[PathKey]:
        """Least recently used first."""
        return list(self._entries)

"""LSM storage engine: WAL, MemTable, SSTables, compaction and the store facade"""

from metacache.storage.store import ReadCost, ServeTier, Store, StoreCounters, StoredInode

__all__ = ["ReadCost", "ServeTier", "Store", "StoreCounters", "StoredInode"]

"""
Simulated VFS lookup pipeline.

A lookup is answered by exactly one source:

1. the VFS I-cache,
2. MetaCache, when the store answers from its MemTable or warm cache,
3. the disk: without MetaCache a cold lookup costs one block per directory
   level plus the inode block; with MetaCache it costs the table blocks the
   store actually read.

Every metadata block read is a random access and costs a seek. File data is
read sequentially: its blocks plus one seek, unless it is stored inline in
the metadata record.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from metacache.config import SimConfig
from metacache.errors import IsDirectoryError, NotFoundError
from metacache.model.inode import InodeRecord
from metacache.model.keys import ROOT, PathKey, key_for_path
from metacache.storage.store import Store, StoredInode
from metacache.vfs.disk import DiskModel, baseline_lookup_blocks, data_blocks
from metacache.vfs.icache import ICache

logger = logging.getLogger(__name__)


class LookupSource(Enum):
    ICACHE = "icache"
    METACACHE = "metacache"
    DISK = "disk"


@dataclass(frozen=True)
class LookupResult:
    source: LookupSource
    blocks_read: int
    cost_units: int


@dataclass(frozen=True)
class SimCounters:
    icache_hits: int = 0
    metacache_hits: int = 0
    disk_fallbacks: int = 0
    block_reads: int = 0
    block_writes: int = 0
    seeks: int = 0
    cost_units: int = 0

    def to_dict(self) -> dict:
        return {
            "icache_hits": self.icache_hits,
            "metacache_hits": self.metacache_hits,
            "disk_fallbacks": self.disk_fallbacks,
            "block_reads": self.block_reads,
            "block_writes": self.block_writes,
            "seeks": self.seeks,
            "cost_units": self.cost_units,
        }


class Sim:
    """Sequential state machine over one store. Not thread-safe."""

    def __init__(self, config: SimConfig, store: Store):
        self.config = config.validate()
        self.store = store
        self.icache = ICache(config.icache_capacity)
        self.disk = DiskModel(config.costs)
        self.warm_loaded = 0
        self._icache_hits = 0
        self._metacache_hits = 0
        self._disk_fallbacks = 0

    @classmethod
    def boot(cls, config: SimConfig, store: Store) -> "Sim":
        """
        Start a simulator with an empty I-cache and zeroed counters, warm
        loading the store when MetaCache and warm boot are both enabled.
        """
        sim = cls(config, store)
        if config.metacache_enabled and config.warm_on_boot:
            sim.warm_loaded = store.warm_load()
        else:
            store.drop_warm_cache()
        logger.debug(f"Sim booted: metacache={config.metacache_enabled}, warm={sim.warm_loaded}")
        return sim

    @property
    def inline_limit(self) -> int:
        return min(self.config.inline_threshold, self.store.config.inline_threshold)

    # -- lookup pipeline ---------------------------------------------------

    def _resolve(self, key: PathKey) -> Tuple[Optional[StoredInode], LookupResult]:
        cached = self.icache.get(key)
        if cached is not None:
            self._icache_hits += 1
            return cached, LookupResult(LookupSource.ICACHE, 0, self.disk.ram_hit())

        record, cost = self.store.get(key)
        if self.config.metacache_enabled and cost.from_memory:
            self._metacache_hits += 1
            result = LookupResult(LookupSource.METACACHE, 0, self.disk.ram_hit())
        else:
            if self.config.metacache_enabled:
                blocks = cost.blocks_read
            else:
                blocks = baseline_lookup_blocks(key.path)
            self._disk_fallbacks += 1
            result = LookupResult(LookupSource.DISK, blocks, self.disk.read(blocks, blocks))

        if record is not None:
            self.icache.put(key, record)
        return record, result

    def _metadata_write(self) -> int:
        if self.config.metacache_enabled:
            return self.disk.ram_hit()
        return self.disk.write(1, 1)

    # -- operations --------------------------------------------------------

    def stat(self, path: str) -> Tuple[InodeRecord, LookupResult]:
        """
        Resolve a path to its inode.

        Raises:
            NotFoundError: If no live record exists (the lookup is still charged)
        """
        key = key_for_path(path)
        record, result = self._resolve(key)
        if record is None:
            raise NotFoundError(f"{key.path} not found")
        return record.inode, result

    def create(self, path: str, inode: InodeRecord, payload: Optional[bytes] = None) -> None:
        """
        Create a file or directory record.

        Payloads up to the inline threshold are stored inside the record;
        larger ones are charged as data block writes.

        Raises:
            NotFoundError: If the parent directory does not exist
        """
        key = key_for_path(path)
        if key.parent_path != ROOT:
            parent, _ = self._resolve(key_for_path(key.parent_path))
            if parent is None or not parent.inode.is_directory:
                raise NotFoundError(f"parent directory {key.parent_path} not found")

        payload = payload or b""
        if 0 < len(payload) <= self.inline_limit:
            self.store.put(key, inode, payload)
            record = StoredInode(inode, bytes(payload))
        else:
            self.store.put(key, inode)
            record = StoredInode(inode)
            blocks = data_blocks(len(payload), self.config.block_size)
            if blocks:
                self.disk.write(blocks, 1)
        self._metadata_write()
        self.icache.put(key, record)

    def unlink(self, path: str) -> None:
        """
        Remove a file record.

        Raises:
            NotFoundError: If the path does not exist
            IsDirectoryError: If the path is a directory
        """
        key = key_for_path(path)
        record, _ = self._resolve(key)
        if record is None:
            raise NotFoundError(f"{key.path} not found")
        if record.inode.is_directory:
            raise IsDirectoryError(f"{key.path} is a directory")
        self.store.delete(key)
        self._metadata_write()
        self.icache.invalidate(key)

    def open_read(self, path: str) -> Tuple[int, LookupResult]:
        """
        Stat the file, then read its data.

        Returns:
            (bytes read, combined lookup + data cost)

        Raises:
            NotFoundError: If the path does not exist
            IsDirectoryError: If the path is a directory
        """
        key = key_for_path(path)
        record, lookup = self._resolve(key)
        if record is None:
            raise NotFoundError(f"{key.path} not found")
        if record.inode.is_directory:
            raise IsDirectoryError(f"{key.path} is a directory")

        if record.inline_data is not None:
            return len(record.inline_data), lookup
        blocks = data_blocks(record.inode.size_bytes, self.config.block_size)
        cost = self.disk.read(blocks, 1) if blocks else 0
        return record.inode.size_bytes, LookupResult(
            lookup.source, lookup.blocks_read + blocks, lookup.cost_units + cost
        )

    def counters(self) -> SimCounters:
        disk = self.disk.counters
        return SimCounters(
            icache_hits=self._icache_hits,
            metacache_hits=self._metacache_hits,
            disk_fallbacks=self._disk_fallbacks,
            block_reads=disk.block_reads,
            block_writes=disk.block_writes,
            seeks=disk.seeks,
            cost_units=disk.cost_units,
        )


def sim_boot(config: SimConfig, store: Store) -> Sim:
    return Sim.boot(config, store)


def sim_stat(sim: Sim, path: str) -> Tuple[InodeRecord, LookupResult]:
    return sim.stat(path)


def sim_create(sim: Sim, path: str, inode: InodeRecord, payload: Optional[bytes] = None) -> None:
    sim.create(path, inode, payload)


def sim_open_read(sim: Sim, path: str) -> Tuple[int, LookupResult]:
    return sim.open_read(path)


def sim_counters(sim: Sim) -> SimCounters:
    return sim.counters()

"""
MetaCache store: put / get / delete / scan over a MemTable and a list of
SSTables, with WAL durability, crash recovery, flush, full compaction and the
boot-time warm load.

Data directory layout::

    wal.log            log of the active MemTable
    NNNNNNNNNN.sst     tables, zero-padded file id
    MANIFEST           live table ids, one per line
"""

import logging
import threading
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Set, Tuple

from metacache.config import StoreConfig
from metacache.errors import CorruptTableError, StoreIOError
from metacache.model.codec import ValueRecord, decode_value, encode_value
from metacache.model.inode import DirEntry, InodeRecord, directory_listing
from metacache.model.keys import PathKey, check_parent_path, decode_key, dir_range
from metacache.storage.compaction import merge_compact
from metacache.storage.files import TMP_SUFFIX, WAL_NAME, parse_table_name, table_path
from metacache.storage.manifest import read_manifest, write_manifest
from metacache.storage.memtable import InsertOutcome, MemTable
from metacache.storage.sstable import SSTable, build_sstable
from metacache.storage.wal import WriteAheadLog

logger = logging.getLogger(__name__)


class ServeTier(Enum):
    MEMTABLE = "memtable"
    WARM = "warm"
    SSTABLE = "sstable"


@dataclass(frozen=True)
class ReadCost:
    tier: ServeTier
    blocks_read: int = 0

    @property
    def from_memory(self) -> bool:
        return self.tier in (ServeTier.MEMTABLE, ServeTier.WARM)


@dataclass(frozen=True)
class StoredInode:
    inode: InodeRecord
    inline_data: Optional[bytes] = None


@dataclass
class StoreCounters:
    puts: int = 0
    deletes: int = 0
    gets: int = 0
    flushes: int = 0
    compactions: int = 0
    sstable_blocks_read: int = 0
    memtable_hits: int = 0
    warm_hits: int = 0
    warm_blocks_read: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _live(value: Optional[ValueRecord]) -> Optional[StoredInode]:
    if value is None or value.is_tombstone:
        return None
    return StoredInode(value.inode, value.inline_data)


class Store:
    """
    Single-writer, multi-reader LSM store. All public methods take one
    re-entrant lock, so readers never see a half-applied mutation.

    ``failpoint`` is called with a stage name at every durability boundary of
    flush and compaction; crash-injection tests raise from it.
    """

    def __init__(self, config: StoreConfig):
        self.config = config
        self.data_dir = Path(config.data_dir)
        self.counters = StoreCounters()
        self.failpoint: Optional[Callable[[str], None]] = None
        self._lock = threading.RLock()
        self._tables: List[SSTable] = []
        self._memtable = MemTable(config.memtable_threshold_bytes)
        self._wal: Optional[WriteAheadLog] = None
        self._next_seq = 1
        self._next_file_id = 1
        self._warm: Optional[Dict[PathKey, ValueRecord]] = None
        self._dirty: Set[PathKey] = set()
        self._closed = False

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def open(cls, config: StoreConfig) -> "Store":
        """
        Open or create a store and recover its state.

        Loads the tables named by MANIFEST (every ``.sst`` file when there is
        no MANIFEST yet), removes orphans and temp files, and replays the WAL
        into a fresh MemTable.

        Raises:
            StoreIOError: If the directory cannot be created or read
            CorruptTableError: If a live table is damaged or missing
        """
        config.validate()
        store = cls(config)
        store._recover()
        return store

    def _recover(self) -> None:
        try:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            names = sorted(p.name for p in self.data_dir.iterdir())
        except OSError as e:
            raise StoreIOError(f"cannot open data dir {self.data_dir}: {e}") from e

        for name in names:
            if name.endswith(TMP_SUFFIX):
                logger.warning(f"Removing leftover temp file {name}")
                (self.data_dir / name).unlink(missing_ok=True)

        on_disk = sorted(i for i in (parse_table_name(n) for n in names) if i is not None)
        listed = read_manifest(self.data_dir)
        live = on_disk if listed is None else listed
        for file_id in live:
            if file_id not in on_disk:
                raise CorruptTableError(f"MANIFEST lists missing table {file_id}")
        for file_id in set(on_disk) - set(live):
            logger.warning(f"Removing orphan table {file_id:010d}.sst")
            table_path(self.data_dir, file_id).unlink(missing_ok=True)

        self._tables = [
            SSTable.open(table_path(self.data_dir, i), i, self.config.block_size) for i in live
        ]
        self._next_file_id = max(on_disk + (listed or []) + [0]) + 1
        max_version = 0
        for table in self._tables:
            for _, value in table.iter_entries():
                max_version = max(max_version, value.version)
        if listed is None and self._tables:
            write_manifest(self.data_dir, live)

        self._wal, records = WriteAheadLog.open(self.data_dir / WAL_NAME)
        for rec in records:
            value = decode_value(rec.value)
            self._memtable.insert(decode_key(rec.key), value)
            max_version = max(max_version, value.version)
        self._next_seq = max_version + 1

        logger.info(
            f"Opened store {self.data_dir}: {len(self._tables)} tables, "
            f"{len(records)} WAL records replayed, next version {self._next_seq}"
        )
        if self._memtable.approx_bytes > self._memtable.threshold_bytes:
            self._flush_locked()

    def close(self) -> None:
        """Sync the WAL and release file handles."""
        with self._lock:
            if self._closed:
                return
            if self._wal is not None:
                self._wal.close()
            self._closed = True

    def crash(self) -> None:
        """Simulate power loss: unsynced WAL frames and the MemTable are gone."""
        with self._lock:
            if self._wal is not None:
                self._wal.abandon()
            self._memtable = MemTable(self.config.memtable_threshold_bytes)
            self._closed = True

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    # -- introspection -----------------------------------------------------

    @property
    def tables(self) -> List[SSTable]:
        with self._lock:
            return list(self._tables)

    @property
    def memtable(self) -> MemTable:
        return self._memtable

    @property
    def warm_loaded(self) -> bool:
        return self._warm is not None

    def snapshot_counters(self) -> StoreCounters:
        with self._lock:
            return StoreCounters(**asdict(self.counters))

    def _check_open(self) -> None:
        if self._closed:
            raise StoreIOError(f"store {self.data_dir} is closed")

    def _hit(self, stage: str) -> None:
        if self.failpoint is not None:
            self.failpoint(stage)

    # -- writes ------------------------------------------------------------

    def put(self, key: PathKey, inode: InodeRecord, inline_data: Optional[bytes] = None) -> None:
        """
        Insert or replace the record at key.

        Raises:
            InlineTooLargeError: If inline_data exceeds the inline threshold
            InvalidInodeError: If the inode violates its invariants
            StoreIOError: On WAL or table write failure
        """
        inode.validate(self.config.block_size)
        with self._lock:
            self._check_open()
            value = ValueRecord.for_inode(
                inode, self._next_seq, inline_data, self.config.inline_threshold
            )
            self._write(key, value)
            self.counters.puts += 1

    def delete(self, key: PathKey) -> None:
        """Write a tombstone for key. Deleting an absent key is allowed."""
        with self._lock:
            self._check_open()
            self._write(key, ValueRecord.tombstone(self._next_seq))
            self.counters.deletes += 1

    def _write(self, key: PathKey, value: ValueRecord) -> None:
        self._next_seq += 1
        mark = self._wal.mark()
        self._wal.append_entry(key.encoded, encode_value(value))
        if self.config.sync_every_write:
            try:
                self._wal.sync()
            except StoreIOError:
                self._wal.rollback(mark)
                raise
        outcome = self._memtable.insert(key, value)
        if self._warm is not None:
            self._dirty.add(key)
        if outcome == InsertOutcome.OK_THRESHOLD_REACHED:
            # the write is already logged; a failed flush is retried on the next write
            try:
                self._flush_locked()
                if len(self._tables) >= self.config.max_tables_before_compact:
                    self._compact_locked()
            except StoreIOError as e:
                logger.error(f"Flush after write to {key.path} failed: {e}", exc_info=True)

    def sync(self) -> None:
        with self._lock:
            self._check_open()
            self._wal.sync()

    # -- reads -------------------------------------------------------------

    def get(self, key: PathKey) -> Tuple[Optional[StoredInode], ReadCost]:
        """
        Look a key up: MemTable, then the warm cache (unless the key was
        written since the load), then tables newest to oldest.

        Returns:
            (record or None, cost describing the tier that answered)
        """
        with self._lock:
            self._check_open()
            self.counters.gets += 1
            value = self._memtable.get(key)
            if value is not None:
                self.counters.memtable_hits += 1
                return _live(value), ReadCost(ServeTier.MEMTABLE)

            if self._warm is not None and key not in self._dirty:
                self.counters.warm_hits += 1
                return _live(self._warm.get(key)), ReadCost(ServeTier.WARM)

            blocks = 0
            for table in reversed(self._tables):
                value, read = table.get(key)
                blocks += read
                if value is not None:
                    break
            self.counters.sstable_blocks_read += blocks
            return _live(value), ReadCost(ServeTier.SSTABLE, blocks)

    def scan_dir(self, parent_path: str) -> List[Tuple[str, InodeRecord]]:
        """
        List the live children of a directory in name order.

        Raises:
            InvalidParentError: If parent_path is not absolute and normalized
        """
        return [(key.name, inode) for key, inode in self._scan_children(parent_path)]

    def list_dir(self, parent_path: str) -> List[DirEntry]:
        """Same as ``scan_dir``, as DirEntry values."""
        return directory_listing(self._scan_children(parent_path))

    def _scan_children(self, parent_path: str) -> List[Tuple[PathKey, InodeRecord]]:
        check_parent_path(parent_path)
        low, high = dir_range(parent_path)
        with self._lock:
            self._check_open()
            newest: Dict[PathKey, ValueRecord] = {}
            for table in self._tables:
                entries, blocks = table.scan_prefix(parent_path)
                self.counters.sstable_blocks_read += blocks
                for key, value in entries:
                    newest[key] = value
            for key, value in self._memtable.range(low, high):
                newest[key] = value
        return [
            (key, value.inode)
            for key, value in sorted(newest.items())
            if not value.is_tombstone and key.name
        ]

    # -- flush / compaction ------------------------------------------------

    def flush(self) -> None:
        """Persist the MemTable as a new table and start a fresh WAL."""
        with self._lock:
            self._check_open()
            self._flush_locked()

    def _flush_locked(self) -> None:
        if len(self._memtable) == 0:
            return
        entries = self._memtable.freeze()
        file_id = self._next_file_id
        self._next_file_id += 1
        try:
            table = build_sstable(
                entries,
                file_id,
                self.data_dir,
                self.config.block_size,
                self.config.bloom_bits_per_key,
                self.config.bloom_hashes,
            )
            self._hit("flush:table_written")
            write_manifest(self.data_dir, [t.file_id for t in self._tables] + [file_id])
        except BaseException:
            self._memtable.thaw()
            raise
        self._tables.append(table)
        self._memtable = MemTable(self.config.memtable_threshold_bytes)
        self.counters.flushes += 1
        self._hit("flush:manifest_written")
        self._wal.delete()
        self._hit("flush:wal_deleted")
        self._wal, _ = WriteAheadLog.open(self.data_dir / WAL_NAME)
        logger.info(f"Flushed {len(entries)} entries to {table.path.name}")

    def compact(self) -> None:
        """Merge every table into one, dropping tombstones."""
        with self._lock:
            self._check_open()
            self._compact_locked()

    def _compact_locked(self) -> None:
        if not self._tables:
            return
        old = self._tables
        file_id = self._next_file_id
        self._next_file_id += 1
        merged = merge_compact(
            old,
            drop_tombstones=True,
            new_file_id=file_id,
            data_dir=self.data_dir,
            block_size=self.config.block_size,
            bits_per_key=self.config.bloom_bits_per_key,
            num_hashes=self.config.bloom_hashes,
        )
        self._hit("compact:table_written")
        survivors = [merged] if merged is not None else []
        write_manifest(self.data_dir, [t.file_id for t in survivors])
        self._tables = survivors
        self._hit("compact:manifest_written")
        for table in old:
            try:
                table.path.unlink(missing_ok=True)
            except OSError as e:
                logger.warning(f"Could not remove compacted table {table.path.name}: {e}")
        self.counters.compactions += 1

    # -- warm load ---------------------------------------------------------

    def warm_load(self) -> int:
        """
        Read every table into an in-memory newest-wins map.

        Keys currently in the MemTable, and keys written afterwards, are
        marked dirty and bypass the warm map.

        Returns:
            Number of live records loaded
        """
        with self._lock:
            self._check_open()
            warm: Dict[PathKey, ValueRecord] = {}
            for table in self._tables:
                for key, value in table.iter_entries():
                    warm[key] = value
                self.counters.warm_blocks_read += table.block_count
            self._warm = warm
            self._dirty = {key for key, _ in self._memtable.items()}
            loaded = sum(1 for value in warm.values() if not value.is_tombstone)
            logger.info(f"Warm load: {loaded} records from {len(self._tables)} tables")
            return loaded

    def drop_warm_cache(self) -> None:
        with self._lock:
            self._warm = None
            self._dirty = set()


def store_open(config: StoreConfig) -> Store:
    return Store.open(config)

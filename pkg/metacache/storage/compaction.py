"""
Merge compaction of SSTables.
"""

import heapq
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from metacache.config import DEFAULT_BLOCK_SIZE
from metacache.errors import UnsortedInputError
from metacache.storage.sstable import Entry, SSTable, build_sstable

logger = logging.getLogger(__name__)


def merge_entries(tables: Sequence[SSTable], drop_tombstones: bool) -> List[Entry]:
    """
    K-way merge in key order. For a key present in several tables the one
    from the highest file_id wins.
    """
    def tagged(table: SSTable):
        rank = -table.file_id
        for key, value in table.iter_entries():
            yield key.encoded, rank, key, value

    merged: List[Entry] = []
    last_key: Optional[bytes] = None
    for encoded, _, key, value in heapq.merge(*(tagged(t) for t in tables)):
        if encoded == last_key:
            continue
        last_key = encoded
        if drop_tombstones and value.is_tombstone:
            continue
        merged.append((key, value))
    return merged


def merge_compact(
    tables: Sequence[SSTable],
    drop_tombstones: bool,
    new_file_id: int,
    data_dir: Path,
    block_size: int = DEFAULT_BLOCK_SIZE,
    bits_per_key: int = 10,
    num_hashes: int = 7,
) -> Optional[SSTable]:
    """
    Merge tables into one new table.

    Args:
        tables: Non-empty list of input tables
        drop_tombstones: Drop deletion markers; only safe when merging every table
        new_file_id: Id for the output, greater than every input id
        data_dir: Where to publish the output

    Returns:
        The merged SSTable, or None when nothing survives the merge

    Raises:
        UnsortedInputError: On an empty input list or a non-increasing file id
        CorruptTableError, StoreIOError: From reading or writing tables
    """
    if not tables:
        raise UnsortedInputError("merge_compact needs at least one table")
    if new_file_id <= max(t.file_id for t in tables):
        raise UnsortedInputError(f"new file id {new_file_id} must exceed every input id")

    merged = merge_entries(tables, drop_tombstones)
    source_count = sum(t.entry_count for t in tables)
    if not merged:
        logger.info(f"Compaction of {len(tables)} tables left no live entries")
        return None
    table = build_sstable(merged, new_file_id, data_dir, block_size, bits_per_key, num_hashes)
    logger.info(
        f"Compacted {len(tables)} tables ({source_count} entries) into "
        f"{table.path.name} ({table.entry_count} entries)"
    )
    return table

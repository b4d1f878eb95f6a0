import os

import pytest

from metacache.errors import CorruptTableError, UnsortedInputError
from metacache.model.codec import ValueRecord
from metacache.model.keys import make_path_key
from metacache.storage.files import table_path
from metacache.storage.sstable import HEADER, SSTable, build_sstable, sstable_get
from tests.factories import make_inode


def entries_for(names, parent="/d"):
    return [
        (make_path_key(parent, name), ValueRecord.for_inode(make_inode(i + 1), i + 1))
        for i, name in enumerate(sorted(names))
    ]


def test_every_key_found_and_absent_keys_not(tmp_path):
    entries = entries_for([f"f{i:04d}" for i in range(300)])
    table = build_sstable(entries, 1, tmp_path, block_size=512)
    assert table.entry_count == 300
    assert table.block_count > 1
    for key, value in entries:
        found, blocks = sstable_get(table, key)
        assert found == value
        assert blocks == 1
    missing, blocks = table.get(make_path_key("/d", "nope"))
    assert missing is None
    assert blocks <= 1


def test_out_of_range_key_reads_nothing(tmp_path):
    table = build_sstable(entries_for(["b", "c"]), 1, tmp_path)
    assert table.get(make_path_key("/a", "a")) == (None, 0)
    assert table.get(make_path_key("/z", "z")) == (None, 0)


def test_reopen_restores_metadata(tmp_path):
    entries = entries_for([f"f{i}" for i in range(50)])
    built = build_sstable(entries, 7, tmp_path, block_size=256)
    reopened = SSTable.open(table_path(tmp_path, 7), 7, 256)
    assert reopened.entry_count == 50
    assert reopened.min_key == entries[0][0]
    assert reopened.max_key == entries[-1][0]
    assert reopened.sparse_index == built.sparse_index
    assert list(reopened.iter_entries()) == entries


def test_file_starts_with_magic_and_no_temp_left(tmp_path):
    build_sstable(entries_for(["a"]), 3, tmp_path)
    assert table_path(tmp_path, 3).read_bytes().startswith(HEADER)
    assert [p.name for p in tmp_path.iterdir()] == ["0000000003.sst"]


def test_unsorted_or_empty_input_rejected(tmp_path):
    entries = entries_for(["a", "b"])
    with pytest.raises(UnsortedInputError):
        build_sstable(list(reversed(entries)), 1, tmp_path)
    with pytest.raises(UnsortedInputError):
        build_sstable([entries[0], entries[0]], 1, tmp_path)
    with pytest.raises(UnsortedInputError):
        build_sstable([], 1, tmp_path)


def test_oversized_pair_gets_own_block(tmp_path):
    small = ValueRecord.for_inode(make_inode(1), 1)
    big = ValueRecord.for_inode(make_inode(2, size=5000), 2, b"x" * 3000)
    entries = [
        (make_path_key("/d", "a"), small),
        (make_path_key("/d", "b"), big),
        (make_path_key("/d", "c"), small),
    ]
    table = build_sstable(entries, 1, tmp_path, block_size=1024)
    assert table.block_count == 3
    assert table.get(make_path_key("/d", "b")) == (big, 1)


def test_scan_prefix_reads_only_that_directory(tmp_path):
    entries = sorted(
        entries_for([f"x{i:03d}" for i in range(100)], parent="/a")
        + entries_for([f"y{i:03d}" for i in range(100)], parent="/b")
    )
    table = build_sstable(entries, 1, tmp_path, block_size=512)
    found, blocks = table.scan_prefix("/b")
    assert [k.name for k, _ in found] == [f"y{i:03d}" for i in range(100)]
    assert 0 < blocks < table.block_count
    assert table.scan_prefix("/c") == ([], 0)


def test_scan_range_is_half_open(tmp_path):
    entries = entries_for(["a", "b", "c", "d"])
    table = build_sstable(entries, 1, tmp_path)
    found, _ = table.scan_range(entries[1][0].encoded, entries[3][0].encoded)
    assert [k.name for k, _ in found] == ["b", "c"]


def test_flipped_index_byte_detected(tmp_path):
    build_sstable(entries_for(["a", "b"]), 1, tmp_path)
    path = table_path(tmp_path, 1)
    data = bytearray(path.read_bytes())
    data[-30] ^= 0x01
    path.write_bytes(bytes(data))
    with pytest.raises(CorruptTableError):
        SSTable.open(path, 1)


@pytest.mark.parametrize("cut", [1, 10, 24])
def test_truncated_table_detected(tmp_path, cut):
    build_sstable(entries_for(["a", "b"]), 1, tmp_path)
    path = table_path(tmp_path, 1)
    with open(path, "r+b") as fh:
        fh.truncate(os.path.getsize(path) - cut)
    with pytest.raises(CorruptTableError):
        SSTable.open(path, 1)

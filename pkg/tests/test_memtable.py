import random

import pytest

from metacache.errors import FrozenMemTableError
from metacache.model.codec import ValueRecord
from metacache.model.keys import dir_range, make_path_key
from metacache.storage.memtable import InsertOutcome, MemTable, entry_size, mt_freeze, mt_get, mt_insert
from tests.factories import make_inode


def value(version, number=1):
    return ValueRecord.for_inode(make_inode(number), version)


def test_get_returns_newest():
    mt = MemTable()
    key = make_path_key("/a", "x")
    mt.insert(key, value(1, 10))
    mt.insert(key, value(2, 20))
    assert mt.get(key).inode.inode_number == 20
    assert len(mt) == 1


def test_tombstone_is_a_value():
    mt = MemTable()
    key = make_path_key("/a", "x")
    mt.insert(key, ValueRecord.tombstone(3))
    assert mt.get(key).is_tombstone
    assert mt.get(make_path_key("/a", "y")) is None


def test_items_in_key_order():
    mt = MemTable()
    names = ["m", "a", "z", "b"]
    for i, name in enumerate(names):
        mt.insert(make_path_key("/d", name), value(i + 1))
    assert [k.name for k, _ in mt.items()] == sorted(names)


def test_size_accounting_tracks_overwrites():
    mt = MemTable()
    key = make_path_key("/a", "x")
    first = value(1)
    second = ValueRecord.for_inode(make_inode(1), 2, b"payload")
    mt.insert(key, first)
    assert mt.approx_bytes == entry_size(key, first)
    mt.insert(key, second)
    assert mt.approx_bytes == entry_size(key, second)


def test_threshold_signal():
    key = make_path_key("/a", "x")
    size = entry_size(key, value(1))
    mt = MemTable(threshold_bytes=size * 2)
    assert mt.insert(make_path_key("/a", "x"), value(1)) == InsertOutcome.OK
    assert mt.insert(make_path_key("/a", "y"), value(2)) == InsertOutcome.OK
    assert mt.insert(make_path_key("/a", "z"), value(3)) == InsertOutcome.OK_THRESHOLD_REACHED


def test_freeze_blocks_inserts():
    mt = MemTable()
    mt.insert(make_path_key("/a", "x"), value(1))
    entries = mt.freeze()
    assert [k.name for k, _ in entries] == ["x"]
    with pytest.raises(FrozenMemTableError):
        mt.insert(make_path_key("/a", "y"), value(2))


def test_thaw_after_failed_flush_accepts_inserts():
    mt = MemTable()
    mt.insert(make_path_key("/a", "x"), value(1))
    mt.freeze()
    mt.thaw()
    mt.insert(make_path_key("/a", "y"), value(2))
    assert [k.name for k, _ in mt.items()] == ["x", "y"]


def test_range_selects_one_directory():
    mt = MemTable()
    for parent, name in [("/a", "x"), ("/a/x", "y"), ("/a", "z"), ("/ab", "q"), ("/", "a")]:
        mt.insert(make_path_key(parent, name), value(1))
    low, high = dir_range("/a")
    assert [(k.parent_path, k.name) for k, _ in mt.range(low, high)] == [("/a", "x"), ("/a", "z")]


def test_matches_a_plain_dict(rng: random.Random):
    mt = MemTable()
    model = {}
    keys = [make_path_key(f"/d{i % 7}", f"f{i}") for i in range(200)]
    for version in range(1, 3001):
        key = rng.choice(keys)
        v = ValueRecord.tombstone(version) if rng.random() < 0.2 else value(version, version)
        mt.insert(key, v)
        model[key] = v
    assert len(mt) == len(model)
    for key in keys:
        assert mt.get(key) == model.get(key)
    assert [k for k, _ in mt.items()] == sorted(model)
    assert mt.approx_bytes == sum(entry_size(k, v) for k, v in model.items())


def test_module_level_operations():
    mt = MemTable()
    key = make_path_key("/a", "x")
    assert mt_insert(mt, key, value(1)) == InsertOutcome.OK
    assert mt_get(mt, key) == value(1)
    assert mt_freeze(mt) == [(key, value(1))]

import random
from dataclasses import replace

import pytest

from metacache.config import StoreConfig
from metacache.errors import CorruptTableError
from metacache.model.keys import make_path_key
from metacache.storage.files import MANIFEST_NAME, WAL_NAME, table_path
from metacache.storage.store import Store
from tests.factories import make_inode
from tests.oracle import OracleMap

STAGES = [
    "flush:table_written",
    "flush:manifest_written",
    "flush:wal_deleted",
    "compact:table_written",
    "compact:manifest_written",
]


class InjectedCrash(Exception):
    pass


def crash_on(stage: str, hit: int):
    seen = {"count": 0}

    def failpoint(name: str) -> None:
        if name == stage:
            seen["count"] += 1
            if seen["count"] == hit:
                raise InjectedCrash(f"{stage} #{hit}")

    return failpoint


def assert_matches(store: Store, oracle: OracleMap, keys) -> None:
    for key in keys:
        record = store.get(key)[0]
        expected = oracle.get(key)
        assert record == expected, key
    assert store.scan_dir("/d") == oracle.scan_dir("/d")


def test_reopen_after_close(store_config):
    with Store.open(store_config) as s:
        s.put(make_path_key("/d", "a"), make_inode(1))
        s.flush()
        s.put(make_path_key("/d", "b"), make_inode(2))
    with Store.open(store_config) as s:
        assert s.get(make_path_key("/d", "a"))[0].inode.inode_number == 1
        assert s.get(make_path_key("/d", "b"))[0].inode.inode_number == 2


def test_unsynced_writes_lost_synced_kept(tmp_path):
    config = StoreConfig(data_dir=tmp_path, sync_every_write=False)
    s = Store.open(config)
    s.put(make_path_key("/d", "kept"), make_inode(1))
    s.sync()
    s.put(make_path_key("/d", "lost"), make_inode(2))
    s.crash()
    with Store.open(config) as s:
        assert s.get(make_path_key("/d", "kept"))[0] is not None
        assert s.get(make_path_key("/d", "lost"))[0] is None


def test_versions_resume_after_reopen(store_config):
    key = make_path_key("/d", "a")
    with Store.open(store_config) as s:
        s.put(key, make_inode(1))
        s.put(key, make_inode(2))
        version = s.memtable.get(key).version
        s.flush()
    with Store.open(store_config) as s:
        s.put(key, make_inode(3))
        assert s.memtable.get(key).version > version


def test_orphans_and_temp_files_removed(store_config):
    with Store.open(store_config) as s:
        s.put(make_path_key("/d", "a"), make_inode(1))
        s.flush()
    data_dir = store_config.data_dir
    orphan = table_path(data_dir, 99)
    orphan.write_bytes(table_path(data_dir, 1).read_bytes())
    (data_dir / "0000000100.sst.tmp").write_bytes(b"partial")
    with Store.open(store_config) as s:
        assert [t.file_id for t in s.tables] == [1]
    assert not orphan.exists()
    assert not (data_dir / "0000000100.sst.tmp").exists()


def test_without_manifest_every_table_loads(store_config):
    with Store.open(store_config) as s:
        s.put(make_path_key("/d", "a"), make_inode(1))
        s.flush()
        s.put(make_path_key("/d", "b"), make_inode(2))
        s.flush()
    (store_config.data_dir / MANIFEST_NAME).unlink()
    with Store.open(store_config) as s:
        assert len(s.tables) == 2
        assert s.get(make_path_key("/d", "b"))[0] is not None
    assert (store_config.data_dir / MANIFEST_NAME).exists()


def test_manifest_naming_missing_table_is_corrupt(store_config):
    with Store.open(store_config) as s:
        s.put(make_path_key("/d", "a"), make_inode(1))
        s.flush()
    table_path(store_config.data_dir, 1).unlink()
    with pytest.raises(CorruptTableError):
        Store.open(store_config)


def test_torn_wal_tail_recovers_prefix(store_config):
    with Store.open(store_config) as s:
        for i in range(5):
            s.put(make_path_key("/d", f"f{i}"), make_inode(i + 1))
    wal = store_config.data_dir / WAL_NAME
    data = wal.read_bytes()
    wal.write_bytes(data[:-3])
    with Store.open(store_config) as s:
        names = [name for name, _ in s.scan_dir("/d")]
    assert names == ["f0", "f1", "f2", "f3"]


@pytest.mark.parametrize("hit", range(1, 11))
@pytest.mark.parametrize("stage", STAGES)
def test_crash_at_durability_boundary(tmp_path, stage, hit):
    config = StoreConfig(
        data_dir=tmp_path / "store",
        memtable_threshold_bytes=1024,
        max_tables_before_compact=2,
        block_size=512,
    )
    rng = random.Random(f"{stage}:{hit}")
    keys = [make_path_key("/d", f"f{i:03d}") for i in range(60)]
    oracle = OracleMap()

    store = Store.open(config)
    store.failpoint = crash_on(stage, hit)
    crashed = False
    for op_no in range(1000):
        key = rng.choice(keys)
        try:
            if rng.random() < 0.25:
                oracle.apply("delete", key)
                store.delete(key)
            else:
                inode = make_inode(op_no + 1)
                oracle.apply("put", key, inode)
                store.put(key, inode)
        except InjectedCrash:
            crashed = True
            break
    assert crashed
    store.crash()

    with Store.open(replace(config)) as reopened:
        assert_matches(reopened, oracle, keys)

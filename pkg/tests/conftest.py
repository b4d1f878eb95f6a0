import random

import pytest

from metacache.config import SimConfig, StoreConfig
from metacache.storage.store import Store
from tests.factories import make_inode


@pytest.fixture
def store_config(tmp_path):
    return StoreConfig(data_dir=tmp_path / "store")


@pytest.fixture
def small_store_config(tmp_path):
    """Flushes every few records and compacts after three tables."""
    return StoreConfig(
        data_dir=tmp_path / "store",
        memtable_threshold_bytes=2048,
        max_tables_before_compact=3,
        block_size=512,
        sync_every_write=False,
    )


@pytest.fixture
def store(store_config):
    s = Store.open(store_config)
    yield s
    s.close()


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def sim_config():
    return SimConfig()


@pytest.fixture
def inode_factory():
    return make_inode

import random

from metacache.model.keys import make_path_key
from metacache.storage.store import StoredInode
from metacache.vfs.icache import ICache
from tests.factories import make_inode
from tests.oracle import ReferenceLRU


def record(n):
    return StoredInode(make_inode(n))


def test_evicts_least_recently_used():
    cache = ICache(2)
    a, b, c = (make_path_key("/", name) for name in "abc")
    cache.put(a, record(1))
    cache.put(b, record(2))
    cache.get(a)
    cache.put(c, record(3))
    assert a in cache and c in cache
    assert b not in cache
    assert cache.keys_lru_order() == [a, c]


def test_zero_capacity_caches_nothing():
    cache = ICache(0)
    cache.put(make_path_key("/", "a"), record(1))
    assert len(cache) == 0


def test_matches_reference_lru():
    rng = random.Random(7)
    cache = ICache(16)
    reference = ReferenceLRU(16)
    keys = [make_path_key("/d", f"f{i}") for i in range(40)]
    for step in range(5000):
        key = rng.choice(keys)
        roll = rng.random()
        if roll < 0.5:
            assert cache.get(key) == reference.get(key)
        elif roll < 0.9:
            cache.put(key, record(step + 1))
            reference.put(key, record(step + 1))
        else:
            cache.invalidate(key)
            reference.invalidate(key)
        assert cache.keys_lru_order() == reference.order

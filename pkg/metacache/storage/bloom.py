"""
Bloom filter attached to every SSTable.

Hashing (part of the file format, so it must never change):

    h0 = BLAKE2b(key, digest_size=8, salt=(0).to_bytes(16, "little")) as u64 LE
    h1 = BLAKE2b(key, digest_size=8, salt=(1).to_bytes(16, "little")) as u64 LE | 1
    index_i = (h0 + i * h1) mod m   for i in 0 .. k-1

Bit ``j`` lives in byte ``j // 8`` under mask ``1 << (j % 8)``.
"""

import hashlib
import math
import struct
from typing import Iterable, Iterator, Tuple

from metacache.errors import CorruptTableError

_SALT0 = (0).to_bytes(16, "little")
_SALT1 = (1).to_bytes(16, "little")
_HEADER = struct.Struct("<QB")


def key_hashes(data: bytes) -> Tuple[int, int]:
    h0 = int.from_bytes(hashlib.blake2b(data, digest_size=8, salt=_SALT0).digest(), "little")
    h1 = int.from_bytes(hashlib.blake2b(data, digest_size=8, salt=_SALT1).digest(), "little")
    return h0, h1 | 1


def theoretical_fp_rate(num_bits: int, num_hashes: int, num_keys: int) -> float:
    """(1 - e^(-k n / m))^k"""
    if num_bits == 0:
        return 1.0
    return (1.0 - math.exp(-num_hashes * num_keys / num_bits)) ** num_hashes


class BloomFilter:
    """Set-membership filter over encoded keys. No false negatives."""

    def __init__(self, num_bits: int, num_hashes: int = 7):
        self.num_bits = max(1, num_bits)
        self.num_hashes = num_hashes
        self.bits = bytearray((self.num_bits + 7) // 8)
        self.n_added = 0

    @classmethod
    def for_keys(cls, count: int, bits_per_key: int = 10, num_hashes: int = 7) -> "BloomFilter":
        return cls(max(count, 1) * bits_per_key, num_hashes)

    def _indexes(self, data: bytes) -> Iterator[int]:
        h0, h1 = key_hashes(data)
        for i in range(self.num_hashes):
            yield (h0 + i * h1) % self.num_bits

    def add(self, data: bytes) -> None:
        for idx in self._indexes(data):
            self.bits[idx >> 3] |= 1 << (idx & 7)
        self.n_added += 1

    def may_contain(self, data: bytes) -> bool:
        return all(self.bits[idx >> 3] & (1 << (idx & 7)) for idx in self._indexes(data))

    def build_from_keys(self, keys: Iterable[bytes]) -> "BloomFilter":
        for key in keys:
            self.add(key)
        return self

    def to_bytes(self) -> bytes:
        """m as u64, k as u8, then the bit bytes."""
        return _HEADER.pack(self.num_bits, self.num_hashes) + bytes(self.bits)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BloomFilter":
        if len(data) < _HEADER.size:
            raise CorruptTableError("bloom section too short")
        num_bits, num_hashes = _HEADER.unpack_from(data, 0)
        expected = _HEADER.size + (num_bits + 7) // 8
        if num_bits == 0 or len(data) != expected:
            raise CorruptTableError(f"bloom section length {len(data)} != {expected}")
        bloom = cls(num_bits, num_hashes)
        bloom.bits = bytearray(data[_HEADER.size:])
        return bloom


def bloom_add(f: BloomFilter, key) -> None:
    f.add(key.encoded)


def bloom_query(f: BloomFilter, key) -> bool:
    return f.may_contain(key.encoded)

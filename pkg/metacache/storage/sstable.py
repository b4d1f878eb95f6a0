"""
Immutable sorted runs on disk.

File layout (little-endian):

    header      "MCSS" 0x01
    data blocks pairs of (u32 key length, key, u32 value length, value);
                a pair never straddles two blocks, blocks may underfill, and a
                pair larger than block_size gets a block of its own
    bloom       u64 m, u8 k, ceil(m / 8) bit bytes
    index       u64 entry count, u32 block count,
                per block: u32 first-key length, first key, u64 block offset,
                u32 max-key length, max key
    footer      u64 bloom offset, u64 index offset,
                u32 CRC32 of bloom + index sections, "MCSS"
"""

import bisect
import logging
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple

from metacache.config import DEFAULT_BLOCK_SIZE
from metacache.errors import CorruptTableError, CorruptValueError, StoreIOError, UnsortedInputError
from metacache.model.codec import ValueRecord, decode_value, encode_value
from metacache.model.keys import PathKey, decode_key, dir_range
from metacache.storage.bloom import BloomFilter
from metacache.storage.files import TMP_SUFFIX, publish, table_path

logger = logging.getLogger(__name__)

MAGIC = b"MCSS"
FORMAT_VERSION = 1
HEADER = MAGIC + bytes([FORMAT_VERSION])

_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_FOOTER = struct.Struct("<QQI4s")

Entry = Tuple[PathKey, ValueRecord]


def _sized(data: bytes) -> bytes:
    return _U32.pack(len(data)) + data


def _encode_index(entry_count: int, index: Sequence[Tuple[bytes, int]], max_key: bytes) -> bytes:
    out = bytearray(_U64.pack(entry_count))
    out += _U32.pack(len(index))
    for first_key, offset in index:
        out += _sized(first_key)
        out += _U64.pack(offset)
    out += _sized(max_key)
    return bytes(out)


def _decode_index(data: bytes) -> Tuple[int, List[Tuple[bytes, int]], bytes]:
    try:
        (entry_count,) = _U64.unpack_from(data, 0)
        pos = _U64.size
        (count,) = _U32.unpack_from(data, pos)
        pos += _U32.size
        index = []
        for _ in range(count):
            (length,) = _U32.unpack_from(data, pos)
            pos += _U32.size
            first_key = bytes(data[pos:pos + length])
            if len(first_key) != length:
                raise CorruptTableError("index key overruns section")
            pos += length
            (offset,) = _U64.unpack_from(data, pos)
            pos += _U64.size
            index.append((first_key, offset))
        (length,) = _U32.unpack_from(data, pos)
        pos += _U32.size
        max_key = bytes(data[pos:pos + length])
        if len(max_key) != length or pos + length != len(data):
            raise CorruptTableError("index section length mismatch")
    except struct.error as e:
        raise CorruptTableError(f"truncated index section: {e}") from e
    return entry_count, index, max_key


def _parse_block(block: bytes) -> Iterator[Tuple[bytes, bytes]]:
    pos = 0
    size = len(block)
    while pos < size:
        if pos + _U32.size > size:
            raise CorruptTableError("truncated pair header in data block")
        (key_len,) = _U32.unpack_from(block, pos)
        pos += _U32.size
        key = block[pos:pos + key_len]
        pos += key_len
        if pos + _U32.size > size:
            raise CorruptTableError("truncated pair in data block")
        (value_len,) = _U32.unpack_from(block, pos)
        pos += _U32.size
        value = block[pos:pos + value_len]
        pos += value_len
        if pos > size:
            raise CorruptTableError("pair overruns data block")
        yield bytes(key), bytes(value)


def _decode_value(data: bytes) -> ValueRecord:
    try:
        return decode_value(data)
    except CorruptValueError as e:
        raise CorruptTableError(f"bad value in data block: {e}") from e


def _decode_key(data: bytes) -> PathKey:
    try:
        return decode_key(data)
    except CorruptValueError as e:
        raise CorruptTableError(f"bad key in data block: {e}") from e


@dataclass
class SSTable:
    """Handle on one published table file. Immutable; safe for concurrent readers."""

    path: Path
    file_id: int
    entry_count: int
    min_key: PathKey
    max_key: PathKey
    sparse_index: List[Tuple[bytes, int]]
    bloom: BloomFilter
    bloom_offset: int
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        self._first_keys = [first for first, _ in self.sparse_index]

    @property
    def block_count(self) -> int:
        return len(self.sparse_index)

    @classmethod
    def open(cls, path: Path, file_id: int, block_size: int = DEFAULT_BLOCK_SIZE) -> "SSTable":
        """
        Open a table by reading its footer, bloom and index sections.

        Raises:
            CorruptTableError: Bad magic, bad checksum or malformed sections
            StoreIOError: If the file cannot be read
        """
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                fh.seek(0, os.SEEK_END)
                size = fh.tell()
                if size < len(HEADER) + _FOOTER.size:
                    raise CorruptTableError(f"{path.name}: file too short ({size} bytes)")
                fh.seek(0)
                header = fh.read(len(HEADER))
                fh.seek(size - _FOOTER.size)
                bloom_off, index_off, crc, magic = _FOOTER.unpack(fh.read(_FOOTER.size))
                if header != HEADER or magic != MAGIC:
                    raise CorruptTableError(f"{path.name}: bad magic or version")
                if not len(HEADER) < bloom_off <= index_off <= size - _FOOTER.size:
                    raise CorruptTableError(f"{path.name}: section offsets out of range")
                fh.seek(bloom_off)
                sections = fh.read(size - _FOOTER.size - bloom_off)
        except OSError as e:
            raise StoreIOError(f"cannot read table {path}: {e}") from e

        if zlib.crc32(sections) & 0xFFFFFFFF != crc:
            raise CorruptTableError(f"{path.name}: footer checksum mismatch")
        split = index_off - bloom_off
        bloom = BloomFilter.from_bytes(sections[:split])
        entry_count, index, max_key = _decode_index(sections[split:])
        if not index:
            raise CorruptTableError(f"{path.name}: empty index")
        bloom.n_added = entry_count
        logger.debug(f"Opened {path.name}: {entry_count} entries in {len(index)} blocks")
        return cls(
            path=path,
            file_id=file_id,
            entry_count=entry_count,
            min_key=_decode_key(index[0][0]),
            max_key=_decode_key(max_key),
            sparse_index=index,
            bloom=bloom,
            bloom_offset=bloom_off,
            block_size=block_size,
        )

    def _block_bounds(self, block_no: int) -> Tuple[int, int]:
        start = self.sparse_index[block_no][1]
        if block_no + 1 < len(self.sparse_index):
            end = self.sparse_index[block_no + 1][1]
        else:
            end = self.bloom_offset
        return start, end

    def _read_block(self, fh, block_no: int) -> bytes:
        start, end = self._block_bounds(block_no)
        fh.seek(start)
        data = fh.read(end - start)
        if len(data) != end - start:
            raise CorruptTableError(f"{self.path.name}: short read of block {block_no}")
        return data

    def _open_file(self):
        try:
            return open(self.path, "rb")
        except OSError as e:
            raise StoreIOError(f"cannot open table {self.path}: {e}") from e

    def might_contain(self, key: PathKey) -> bool:
        if key < self.min_key or self.max_key < key:
            return False
        return self.bloom.may_contain(key.encoded)

    def get(self, key: PathKey) -> Tuple[Optional[ValueRecord], int]:
        """
        Point lookup.

        Returns:
            (value or None, data blocks read); never more than one block
        """
        if not self.might_contain(key):
            return None, 0
        target = key.encoded
        block_no = bisect.bisect_right(self._first_keys, target) - 1
        if block_no < 0:
            return None, 0
        with self._open_file() as fh:
            try:
                block = self._read_block(fh, block_no)
            except OSError as e:
                raise StoreIOError(f"cannot read table {self.path}: {e}") from e
        for stored_key, stored_value in _parse_block(block):
            if stored_key == target:
                return _decode_value(stored_value), 1
            if stored_key > target:
                break
        return None, 1

    def iter_entries(self) -> Iterator[Entry]:
        """Every entry in key order; reads each block once."""
        with self._open_file() as fh:
            for block_no in range(len(self.sparse_index)):
                try:
                    block = self._read_block(fh, block_no)
                except OSError as e:
                    raise StoreIOError(f"cannot read table {self.path}: {e}") from e
                for key, value in _parse_block(block):
                    yield _decode_key(key), _decode_value(value)

    def scan_range(self, low: bytes, high: bytes) -> Tuple[List[Entry], int]:
        """
        Entries with low <= encoded key < high.

        Returns:
            (entries in key order, data blocks read)
        """
        if high <= self.min_key.encoded or low > self.max_key.encoded:
            return [], 0
        start = max(bisect.bisect_right(self._first_keys, low) - 1, 0)
        entries: List[Entry] = []
        blocks = 0
        with self._open_file() as fh:
            for block_no in range(start, len(self.sparse_index)):
                if self._first_keys[block_no] >= high:
                    break
                try:
                    block = self._read_block(fh, block_no)
                except OSError as e:
                    raise StoreIOError(f"cannot read table {self.path}: {e}") from e
                blocks += 1
                for key, value in _parse_block(block):
                    if key >= high:
                        break
                    if key >= low:
                        entries.append((_decode_key(key), _decode_value(value)))
        return entries, blocks

    def scan_prefix(self, parent_path: str) -> Tuple[List[Entry], int]:
        """Direct children of parent_path, read from the blocks that can hold them."""
        low, high = dir_range(parent_path)
        return self.scan_range(low, high)


def build_sstable(
    entries: Sequence[Entry],
    file_id: int,
    data_dir: Path,
    block_size: int = DEFAULT_BLOCK_SIZE,
    bits_per_key: int = 10,
    num_hashes: int = 7,
) -> SSTable:
    """
    Write a new table file and open it.

    Args:
        entries: Strictly sorted, non-empty (key, value) pairs
        file_id: Id of the new table; names the file
        data_dir: Directory to publish into
        block_size: Target data block size in bytes
        bits_per_key: Bloom filter sizing
        num_hashes: Bloom filter hash count

    Returns:
        The opened SSTable

    Raises:
        UnsortedInputError: If entries are empty or not strictly increasing
        StoreIOError: On write failure
    """
    if not entries:
        raise UnsortedInputError("cannot build an empty SSTable")
    previous = None
    for key, _ in entries:
        if previous is not None and not previous < key:
            raise UnsortedInputError(f"entries not strictly sorted at {key}")
        previous = key

    bloom = BloomFilter.for_keys(len(entries), bits_per_key, num_hashes)
    index: List[Tuple[bytes, int]] = []
    body = bytearray(HEADER)
    block = bytearray()
    block_first: Optional[bytes] = None

    def close_block():
        nonlocal block, block_first
        if block:
            index.append((block_first, len(body)))
            body.extend(block)
            block = bytearray()
            block_first = None

    for key, value in entries:
        encoded_key = key.encoded
        pair = _sized(encoded_key) + _sized(encode_value(value))
        if block and len(block) + len(pair) > block_size:
            close_block()
        if not block:
            block_first = encoded_key
        block += pair
        bloom.add(encoded_key)
    close_block()

    bloom_offset = len(body)
    bloom_bytes = bloom.to_bytes()
    index_bytes = _encode_index(len(entries), index, entries[-1][0].encoded)
    index_offset = bloom_offset + len(bloom_bytes)
    sections = bloom_bytes + index_bytes
    footer = _FOOTER.pack(bloom_offset, index_offset, zlib.crc32(sections) & 0xFFFFFFFF, MAGIC)

    final_path = table_path(data_dir, file_id)
    tmp_path = final_path.with_name(final_path.name + TMP_SUFFIX)
    try:
        with open(tmp_path, "wb") as fh:
            fh.write(body)
            fh.write(sections)
            fh.write(footer)
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as e:
        raise StoreIOError(f"cannot write table {tmp_path}: {e}") from e
    publish(tmp_path, final_path)
    logger.debug(f"Wrote {final_path.name}: {len(entries)} entries, {len(index)} blocks")
    return SSTable.open(final_path, file_id, block_size)


def sstable_get(t: SSTable, key: PathKey) -> Tuple[Optional[ValueRecord], int]:
    return t.get(key)

"""
Binary codec for stored values.

Layout (all integers little-endian, fixed width):

    kind     u8     1 = INODE, 2 = INODE_WITH_INLINE_DATA, 3 = TOMBSTONE
    version  u64
    body     (INODE / INODE_WITH_INLINE_DATA only)
        inode_number u64, file_type u8, size_bytes u64, owner_uid u32,
        group_gid u32, permissions u16, link_count u32, generation u32,
        acl          u32 length + bytes
        xattrs       u32 count, then per entry u32 name length + UTF-8 name,
                     u32 value length + bytes
        block_refs   u32 count + u64 each
        inline_data  u32 length + bytes (INODE_WITH_INLINE_DATA only)

The same bytes are the value payload of WAL records and SSTable entries.
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

from metacache.errors import CorruptValueError, InlineTooLargeError
from metacache.model.inode import FileType, InodeRecord

_HEADER = struct.Struct("<BQ")
_INODE_FIXED = struct.Struct("<QBQIIHII")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class ValueKind(IntEnum):
    INODE = 1
    INODE_WITH_INLINE_DATA = 2
    TOMBSTONE = 3


@dataclass(frozen=True)
class ValueRecord:
    kind: ValueKind
    version: int
    inode: Optional[InodeRecord] = None
    inline_data: Optional[bytes] = None

    @property
    def is_tombstone(self) -> bool:
        return self.kind == ValueKind.TOMBSTONE

    @classmethod
    def tombstone(cls, version: int) -> "ValueRecord":
        return cls(ValueKind.TOMBSTONE, version)

    @classmethod
    def for_inode(
        cls,
        inode: InodeRecord,
        version: int,
        inline_data: Optional[bytes] = None,
        inline_threshold: Optional[int] = None,
    ) -> "ValueRecord":
        """
        Build an INODE or INODE_WITH_INLINE_DATA value.

        Raises:
            InlineTooLargeError: If inline_data exceeds inline_threshold
        """
        if inline_data is None:
            return cls(ValueKind.INODE, version, inode)
        if inline_threshold is not None and len(inline_data) > inline_threshold:
            raise InlineTooLargeError(
                f"inline data of {len(inline_data)} bytes exceeds threshold {inline_threshold}"
            )
        return cls(ValueKind.INODE_WITH_INLINE_DATA, version, inode, bytes(inline_data))


def _pack_bytes(out: bytearray, data: bytes) -> None:
    out += _U32.pack(len(data))
    out += data


def _encode_inode(out: bytearray, inode: InodeRecord) -> None:
    out += _INODE_FIXED.pack(
        inode.inode_number,
        int(inode.file_type),
        inode.size_bytes,
        inode.owner_uid,
        inode.group_gid,
        inode.permissions,
        inode.link_count,
        inode.generation,
    )
    _pack_bytes(out, inode.acl)
    out += _U32.pack(len(inode.xattrs))
    for name, value in inode.xattrs:
        _pack_bytes(out, name.encode("utf-8"))
        _pack_bytes(out, value)
    out += _U32.pack(len(inode.block_refs))
    for ref in inode.block_refs:
        out += _U64.pack(ref)


def encode_value(value: ValueRecord) -> bytes:
    """
    Encode a value into its deterministic, self-delimiting binary form.

    Args:
        value: A ValueRecord satisfying its invariants

    Returns:
        Encoded bytes
    """
    out = bytearray(_HEADER.pack(int(value.kind), value.version))
    if value.kind == ValueKind.TOMBSTONE:
        return bytes(out)
    _encode_inode(out, value.inode)
    if value.kind == ValueKind.INODE_WITH_INLINE_DATA:
        _pack_bytes(out, value.inline_data)
    return bytes(out)


class _Reader:
    """Bounds-checked cursor over a byte buffer."""

    def __init__(self, data: bytes):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if n < 0 or end > len(self.data):
            raise CorruptValueError(f"truncated value: need {n} bytes at offset {self.pos}")
        chunk = bytes(self.data[self.pos:end])
        self.pos = end
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))

    def u32(self) -> int:
        return self.unpack(_U32)[0]

    def u64(self) -> int:
        return self.unpack(_U64)[0]

    def sized(self) -> bytes:
        return self.take(self.u32())

    @property
    def exhausted(self) -> bool:
        return self.pos == len(self.data)


def _decode_inode(reader: _Reader) -> InodeRecord:
    (ino, ftype, size, uid, gid, perms, links, gen) = reader.unpack(_INODE_FIXED)
    try:
        file_type = FileType(ftype)
    except ValueError as e:
        raise CorruptValueError(f"unknown file type {ftype}") from e
    acl = reader.sized()
    xattrs = []
    for _ in range(reader.u32()):
        try:
            name = reader.sized().decode("utf-8")
        except UnicodeDecodeError as e:
            raise CorruptValueError("xattr name is not UTF-8") from e
        xattrs.append((name, reader.sized()))
    ref_count = reader.u32()
    if ref_count * _U64.size > len(reader.data) - reader.pos:
        raise CorruptValueError(f"block ref count {ref_count} overruns the value")
    refs = tuple(reader.u64() for _ in range(ref_count))
    return InodeRecord(
        inode_number=ino,
        file_type=file_type,
        size_bytes=size,
        owner_uid=uid,
        group_gid=gid,
        permissions=perms,
        link_count=links,
        generation=gen,
        acl=acl,
        xattrs=tuple(xattrs),
        block_refs=refs,
    )


def decode_value(data: bytes) -> ValueRecord:
    """
    Decode bytes produced by encode_value.

    Args:
        data: Encoded value, exactly one record

    Returns:
        The decoded ValueRecord

    Raises:
        CorruptValueError: Unknown tag, truncated body, length overrun or trailing bytes
    """
    reader = _Reader(data)
    tag, version = reader.unpack(_HEADER)
    try:
        kind = ValueKind(tag)
    except ValueError as e:
        raise CorruptValueError(f"unknown value tag {tag}") from e

    if kind == ValueKind.TOMBSTONE:
        value = ValueRecord.tombstone(version)
    else:
        inode = _decode_inode(reader)
        inline = reader.sized() if kind == ValueKind.INODE_WITH_INLINE_DATA else None
        value = ValueRecord(kind, version, inode, inline)

    if not reader.exhausted:
        raise CorruptValueError(f"{len(reader.data) - reader.pos} trailing bytes after value")
    return value

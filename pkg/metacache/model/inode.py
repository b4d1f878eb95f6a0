"""
Inode metadata record and directory entry.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import List, Tuple

from metacache.errors import InvalidInodeError
from metacache.model.keys import PathKey

U32_MAX = 0xFFFFFFFF
U64_MAX = 0xFFFFFFFFFFFFFFFF


class FileType(IntEnum):
    REGULAR = 1
    DIRECTORY = 2
    SYMLINK = 3


@dataclass(frozen=True)
class InodeRecord:
    """
    Per-file metadata payload.

    ``acl`` and ``xattrs`` are opaque to the store.
    """

    inode_number: int
    file_type: FileType = FileType.REGULAR
    size_bytes: int = 0
    owner_uid: int = 0
    group_gid: int = 0
    permissions: int = 0o644
    link_count: int = 1
    generation: int = 0
    acl: bytes = b""
    xattrs: Tuple[Tuple[str, bytes], ...] = field(default_factory=tuple)
    block_refs: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        # Accept lists from callers; the record itself stays hashable.
        object.__setattr__(self, "file_type", FileType(self.file_type))
        object.__setattr__(self, "xattrs", tuple((n, bytes(v)) for n, v in self.xattrs))
        object.__setattr__(self, "block_refs", tuple(self.block_refs))
        object.__setattr__(self, "acl", bytes(self.acl))

    @property
    def is_directory(self) -> bool:
        return self.file_type == FileType.DIRECTORY

    def validate(self, block_size: int) -> "InodeRecord":
        """
        Check the record invariants and field widths.

        Args:
            block_size: Configured block size; directory sizes must be a multiple of it

        Returns:
            self

        Raises:
            InvalidInodeError: If any invariant is violated
        """
        if not 0 < self.inode_number <= U64_MAX:
            raise InvalidInodeError(f"inode_number must be in 1..2^64-1, got {self.inode_number}")
        if self.link_count < 1 or self.link_count > U32_MAX:
            raise InvalidInodeError(f"link_count must be >= 1, got {self.link_count}")
        if not 0 <= self.size_bytes <= U64_MAX:
            raise InvalidInodeError(f"size_bytes out of range: {self.size_bytes}")
        if self.file_type == FileType.DIRECTORY and self.size_bytes % block_size != 0:
            raise InvalidInodeError(
                f"directory size {self.size_bytes} is not a multiple of block size {block_size}"
            )
        for name, width in (("owner_uid", U32_MAX), ("group_gid", U32_MAX), ("generation", U32_MAX)):
            value = getattr(self, name)
            if not 0 <= value <= width:
                raise InvalidInodeError(f"{name} out of range: {value}")
        if not 0 <= self.permissions <= 0xFFFF:
            raise InvalidInodeError(f"permissions out of range: {self.permissions:o}")
        for ref in self.block_refs:
            if not 0 <= ref <= U64_MAX:
                raise InvalidInodeError(f"block ref out of range: {ref}")
        return self

    def to_dict(self) -> dict:
        return {
            "inode_number": self.inode_number,
            "file_type": self.file_type.name,
            "size_bytes": self.size_bytes,
            "owner_uid": self.owner_uid,
            "group_gid": self.group_gid,
            "permissions": f"{self.permissions:o}",
            "link_count": self.link_count,
            "generation": self.generation,
            "acl": self.acl.hex(),
            "xattrs": {name: value.hex() for name, value in self.xattrs},
            "block_refs": list(self.block_refs),
        }


@dataclass(frozen=True)
class DirEntry:
    """A name within a directory pointing at a child inode."""

    key: PathKey
    child_inode: int

    def __post_init__(self):
        if self.child_inode <= 0:
            raise InvalidInodeError(f"child_inode must be positive, got {self.child_inode}")


def directory_listing(entries: List[Tuple[PathKey, InodeRecord]]) -> List[DirEntry]:
    """Turn (key, inode) pairs from a directory scan into DirEntry values."""
    return [DirEntry(key=key, child_inode=inode.inode_number) for key, inode in entries]

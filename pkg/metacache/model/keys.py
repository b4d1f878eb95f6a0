"""
Ordered path keys.

A key is (parent directory path, name). Its encoding is
``parent bytes ++ 0x00 ++ name bytes``; byte order of encodings is key order,
so all children of one directory are contiguous.
"""

import functools
from dataclasses import dataclass
from typing import Tuple

from metacache.errors import CorruptValueError, InvalidNameError, InvalidParentError

SEPARATOR = b"\x00"
ROOT = "/"


def check_parent_path(parent_path: str) -> None:
    if not parent_path.startswith("/"):
        raise InvalidParentError(f"parent path must be absolute: {parent_path!r}")
    if "\x00" in parent_path:
        raise InvalidParentError("parent path contains NUL")
    if parent_path != ROOT and parent_path.endswith("/"):
        raise InvalidParentError(f"parent path has a trailing separator: {parent_path!r}")
    if "//" in parent_path:
        raise InvalidParentError(f"parent path is not normalized: {parent_path!r}")
    parts = parent_path.split("/")[1:]
    if any(part in (".", "..") for part in parts):
        raise InvalidParentError(f"parent path is not normalized: {parent_path!r}")


def _check_name(parent_path: str, name: str) -> None:
    if name == "":
        if parent_path == ROOT:
            return
        raise InvalidNameError("name must be non-empty")
    if "/" in name or "\x00" in name:
        raise InvalidNameError(f"name contains '/' or NUL: {name!r}")


@functools.total_ordering
@dataclass(frozen=True)
class PathKey:
    """Key of one metadata record. Compare and hash by value."""

    parent_path: str
    name: str

    @functools.cached_property
    def encoded(self) -> bytes:
        return self.parent_path.encode("utf-8") + SEPARATOR + self.name.encode("utf-8")

    def __lt__(self, other: "PathKey") -> bool:
        if not isinstance(other, PathKey):
            return NotImplemented
        return self.encoded < other.encoded

    @property
    def is_root(self) -> bool:
        return self.parent_path == ROOT and self.name == ""

    @property
    def path(self) -> str:
        """Full path this key names."""
        if self.is_root:
            return ROOT
        if self.parent_path == ROOT:
            return ROOT + self.name
        return f"{self.parent_path}/{self.name}"

    def __str__(self) -> str:
        return self.path


ROOT_KEY = PathKey(ROOT, "")


def make_path_key(parent_path: str, name: str) -> PathKey:
    """
    Build a validated key.

    Args:
        parent_path: Absolute, normalized directory path
        name: Entry name; empty only for the root key ("/", "")

    Returns:
        The PathKey

    Raises:
        InvalidParentError: If parent_path is not absolute and normalized
        InvalidNameError: If name is empty (non-root) or contains '/' or NUL
    """
    check_parent_path(parent_path)
    _check_name(parent_path, name)
    return PathKey(parent_path, name)


def encode_key(key: PathKey) -> bytes:
    return key.encoded


def decode_key(data: bytes) -> PathKey:
    """
    Inverse of encode_key.

    Raises:
        CorruptValueError: If the separator is missing or the bytes are not a valid key
    """
    sep = data.find(SEPARATOR)
    if sep < 0:
        raise CorruptValueError("key has no separator")
    try:
        parent_path = data[:sep].decode("utf-8")
        name = data[sep + 1:].decode("utf-8")
        return make_path_key(parent_path, name)
    except (UnicodeDecodeError, InvalidNameError, InvalidParentError) as e:
        raise CorruptValueError(f"invalid key bytes: {e}") from e


def normalize_path(path: str) -> str:
    """
    Normalize an absolute path: collapse repeated separators, drop "." and
    resolve "..", strip the trailing separator.

    Raises:
        InvalidParentError: If the path is not absolute
    """
    if not path.startswith("/"):
        raise InvalidParentError(f"path must be absolute: {path!r}")
    parts = []
    for part in path.split("/"):
        if part in ("", "."):
            continue
        if part == "..":
            if parts:
                parts.pop()
            continue
        parts.append(part)
    return ROOT + "/".join(parts)


def split_path(path: str) -> Tuple[str, str]:
    """
    Split an absolute path into (parent_path, name).

    ``split_path("/a/b")`` is ``("/a", "b")``; the root splits to ``("/", "")``.
    """
    path = normalize_path(path)
    if path == ROOT:
        return ROOT, ""
    parent, _, name = path.rpartition("/")
    return (parent or ROOT), name


def key_for_path(path: str) -> PathKey:
    """Validated key for a full path."""
    parent_path, name = split_path(path)
    return make_path_key(parent_path, name)


def path_depth(path: str) -> int:
    """Number of components: ``/`` is 0, ``/a/b/c`` is 3."""
    return len([part for part in normalize_path(path).split("/") if part])


def dir_range(parent_path: str) -> Tuple[bytes, bytes]:
    """
    Half-open range [low, high) of encoded keys whose parent is ``parent_path``.
    """
    prefix = parent_path.encode("utf-8") + SEPARATOR
    return prefix, parent_path.encode("utf-8") + b"\x01"

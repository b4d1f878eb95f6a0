"""Inode metadata types, path keys and the shared value codec"""

from metacache.model.codec import ValueKind, ValueRecord, decode_value, encode_value
from metacache.model.inode import DirEntry, FileType, InodeRecord
from metacache.model.keys import PathKey, make_path_key, path_depth, split_path

__all__ = [
    "DirEntry",
    "FileType",
    "InodeRecord",
    "PathKey",
    "ValueKind",
    "ValueRecord",
    "decode_value",
    "encode_value",
    "make_path_key",
    "path_depth",
    "split_path",
]

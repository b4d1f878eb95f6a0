"""
File naming and atomic publication helpers for the data directory.
"""

import os
import re
from pathlib import Path
from typing import Optional

from metacache.errors import StoreIOError

SST_SUFFIX = ".sst"
TMP_SUFFIX = ".tmp"
WAL_NAME = "wal.log"
MANIFEST_NAME = "MANIFEST"

_SST_RE = re.compile(r"^(\d{10})\.sst$")


def table_path(data_dir: Path, file_id: int) -> Path:
    return Path(data_dir) / f"{file_id:010d}{SST_SUFFIX}"


def parse_table_name(name: str) -> Optional[int]:
    """file_id of ``NNNNNNNNNN.sst``, or None for any other name."""
    match = _SST_RE.match(name)
    return int(match.group(1)) if match else None


def fsync_dir(directory: Path) -> None:
    if os.name != "posix":
        return
    fd = os.open(str(directory), os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def publish(tmp_path: Path, final_path: Path) -> None:
    """Rename a fully written temp file into place and make the rename durable."""
    try:
        os.replace(tmp_path, final_path)
        fsync_dir(final_path.parent)
    except OSError as e:
        raise StoreIOError(f"cannot publish {final_path}: {e}") from e


def write_atomically(path: Path, data: bytes) -> None:
    """Write via ``<path>.tmp`` + fsync + rename."""
    tmp_path = path.with_name(path.name + TMP_SUFFIX)
    try:
        with open(tmp_path, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as e:
        raise StoreIOError(f"cannot write {tmp_path}: {e}") from e
    publish(tmp_path, path)

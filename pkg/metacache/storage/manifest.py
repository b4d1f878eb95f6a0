"""
MANIFEST: the list of live table ids, one decimal id per line.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional

from metacache.errors import CorruptTableError, StoreIOError
from metacache.storage.files import MANIFEST_NAME, write_atomically

logger = logging.getLogger(__name__)


def manifest_path(data_dir: Path) -> Path:
    return Path(data_dir) / MANIFEST_NAME


def read_manifest(data_dir: Path) -> Optional[List[int]]:
    """Live table ids, or None if the directory has no MANIFEST yet."""
    path = manifest_path(data_dir)
    if not path.exists():
        return None
    try:
        text = path.read_text(encoding="ascii")
    except (OSError, UnicodeDecodeError) as e:
        raise StoreIOError(f"cannot read {path}: {e}") from e
    ids = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if not line.isdigit():
            raise CorruptTableError(f"bad MANIFEST line: {line!r}")
        ids.append(int(line))
    return sorted(ids)


def write_manifest(data_dir: Path, file_ids: Iterable[int]) -> None:
    ids = sorted(file_ids)
    body = "".join(f"{file_id}\n" for file_id in ids)
    write_atomically(manifest_path(data_dir), body.encode("ascii"))
    logger.debug(f"MANIFEST now lists {len(ids)} tables")

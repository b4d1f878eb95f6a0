"""
Write-ahead log.

File = sequence of frames, no header or footer:

    length   u32 LE   payload length
    crc      u32 LE   CRC32 (IEEE) of payload
    payload           seq u64 LE, key (u32 length + bytes), value (u32 length + bytes)

Appends are buffered in memory and become durable on ``sync``. Replay returns
the longest valid prefix and stops silently at the first bad frame.
"""

import logging
import os
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from metacache.errors import SeqGapError, StoreIOError

logger = logging.getLogger(__name__)

_FRAME = struct.Struct("<II")
_SEQ = struct.Struct("<Q")
_LEN = struct.Struct("<I")


@dataclass(frozen=True)
class WalRecord:
    seq: int
    key: bytes
    value: bytes


def encode_record(rec: WalRecord) -> bytes:
    return (
        _SEQ.pack(rec.seq)
        + _LEN.pack(len(rec.key))
        + rec.key
        + _LEN.pack(len(rec.value))
        + rec.value
    )


def decode_record(payload: bytes) -> Optional[WalRecord]:
    """Parse a frame payload; None if its inner lengths do not add up."""
    if len(payload) < _SEQ.size + _LEN.size:
        return None
    (seq,) = _SEQ.unpack_from(payload, 0)
    pos = _SEQ.size
    (key_len,) = _LEN.unpack_from(payload, pos)
    pos += _LEN.size
    if pos + key_len + _LEN.size > len(payload):
        return None
    key = payload[pos:pos + key_len]
    pos += key_len
    (value_len,) = _LEN.unpack_from(payload, pos)
    pos += _LEN.size
    if pos + value_len != len(payload):
        return None
    return WalRecord(seq, bytes(key), bytes(payload[pos:]))


def frame(rec: WalRecord) -> bytes:
    payload = encode_record(rec)
    return _FRAME.pack(len(payload), zlib.crc32(payload) & 0xFFFFFFFF) + payload


def _scan(data: bytes) -> Tuple[List[WalRecord], int]:
    """Return the valid record prefix and the byte length it occupies."""
    records: List[WalRecord] = []
    pos = 0
    last_seq = 0
    while pos + _FRAME.size <= len(data):
        length, crc = _FRAME.unpack_from(data, pos)
        start = pos + _FRAME.size
        end = start + length
        if end > len(data):
            break
        payload = data[start:end]
        if zlib.crc32(payload) & 0xFFFFFFFF != crc:
            break
        rec = decode_record(payload)
        if rec is None or rec.seq != last_seq + 1:
            break
        records.append(rec)
        last_seq = rec.seq
        pos = end
    return records, pos


def wal_replay(path: Path) -> List[WalRecord]:
    """
    Read back every intact record of a log file.

    Args:
        path: Log file; may be empty or end in a torn frame

    Returns:
        The longest valid prefix of records, seq 1, 2, 3, ...

    Raises:
        StoreIOError: If the file cannot be read
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise StoreIOError(f"cannot read WAL {path}: {e}") from e
    records, valid = _scan(data)
    if valid < len(data):
        logger.warning(f"WAL {path}: discarding {len(data) - valid} bytes of torn tail")
    return records


class WriteAheadLog:
    """
    Append-only log with an explicit sync point. Single writer.
    """

    def __init__(self, path: Path, fh, last_seq: int):
        self.path = Path(path)
        self._fh = fh
        self._pending = bytearray()
        self.last_seq = last_seq

    @classmethod
    def open(cls, path: Path) -> Tuple["WriteAheadLog", List[WalRecord]]:
        """
        Open (or create) a log for appending, recovering what is already there.

        A torn tail is cut off the file so new frames follow the valid prefix.

        Returns:
            (log, recovered records)
        """
        path = Path(path)
        records: List[WalRecord] = []
        try:
            if path.exists():
                data = path.read_bytes()
                records, valid = _scan(data)
                if valid < len(data):
                    logger.warning(
                        f"WAL {path}: truncating {len(data) - valid} bytes of torn tail"
                    )
                    with open(path, "r+b") as fh:
                        fh.truncate(valid)
                        fh.flush()
                        os.fsync(fh.fileno())
            fh = open(path, "ab")
        except OSError as e:
            raise StoreIOError(f"cannot open WAL {path}: {e}") from e
        last_seq = records[-1].seq if records else 0
        logger.debug(f"WAL {path} opened, {len(records)} records recovered")
        return cls(path, fh, last_seq), records

    @property
    def next_seq(self) -> int:
        return self.last_seq + 1

    def append(self, rec: WalRecord) -> int:
        """
        Frame and buffer a record. Durable only after ``sync``.

        Raises:
            SeqGapError: If rec.seq is not last seq + 1
            StoreIOError: If the log is closed
        """
        if self._fh is None:
            raise StoreIOError(f"WAL {self.path} is closed")
        if rec.seq != self.last_seq + 1:
            raise SeqGapError(f"expected seq {self.last_seq + 1}, got {rec.seq}")
        self._pending += frame(rec)
        self.last_seq = rec.seq
        return rec.seq

    def append_entry(self, key: bytes, value: bytes) -> int:
        return self.append(WalRecord(self.next_seq, key, value))

    def mark(self) -> Tuple[int, int]:
        """Position to hand back to ``rollback``."""
        return len(self._pending), self.last_seq

    def rollback(self, mark: Tuple[int, int]) -> None:
        """Drop the unsynced frames appended after mark."""
        size, last_seq = mark
        del self._pending[size:]
        self.last_seq = last_seq

    def sync(self) -> None:
        """
        Write buffered frames and fsync.

        On failure the frames stay buffered and the file is cut back to its
        previous length.
        """
        if self._fh is None:
            raise StoreIOError(f"WAL {self.path} is closed")
        if not self._pending:
            return
        start = self._fh.tell()
        try:
            self._write_pending()
        except OSError as e:
            self._truncate(start)
            raise StoreIOError(f"cannot sync WAL {self.path}: {e}") from e
        self._pending.clear()

    def _write_pending(self) -> None:
        self._fh.write(self._pending)
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def _truncate(self, size: int) -> None:
        try:
            self._fh.truncate(size)
            self._fh.seek(size)
        except OSError as e:
            logger.warning(f"WAL {self.path}: could not cut back to {size} bytes: {e}")

    def close(self) -> None:
        if self._fh is None:
            return
        try:
            self.sync()
        finally:
            self._fh.close()
            self._fh = None

    def abandon(self) -> None:
        """Simulated crash: unsynced frames are lost, the file is left as is."""
        self._pending.clear()
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def delete(self) -> None:
        """Close and remove the log file."""
        self.abandon()
        try:
            self.path.unlink(missing_ok=True)
        except OSError as e:
            raise StoreIOError(f"cannot delete WAL {self.path}: {e}") from e


def wal_append(log: WriteAheadLog, rec: WalRecord) -> int:
    return log.append(rec)


def wal_sync(log: WriteAheadLog) -> None:
    log.sync()

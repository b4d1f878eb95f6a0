import random

import pytest

from metacache.errors import SeqGapError, StoreIOError
from metacache.storage.wal import WalRecord, WriteAheadLog, frame, wal_append, wal_replay, wal_sync


def random_records(rng: random.Random, count: int):
    return [
        WalRecord(seq, rng.randbytes(rng.randint(1, 40)), rng.randbytes(rng.randint(0, 120)))
        for seq in range(1, count + 1)
    ]


def write_log(path, records):
    log, _ = WriteAheadLog.open(path)
    for rec in records:
        log.append(rec)
    log.sync()
    log.close()


def test_synced_records_replay_in_order(tmp_path):
    path = tmp_path / "wal.log"
    records = random_records(random.Random(1), 20)
    write_log(path, records)
    assert wal_replay(path) == records


def test_empty_log(tmp_path):
    path = tmp_path / "wal.log"
    path.write_bytes(b"")
    assert wal_replay(path) == []


def test_seq_gap_rejected(tmp_path):
    log, _ = WriteAheadLog.open(tmp_path / "wal.log")
    log.append(WalRecord(1, b"k", b"v"))
    with pytest.raises(SeqGapError):
        log.append(WalRecord(3, b"k", b"v"))
    log.close()


def test_unsynced_frames_lost_on_crash(tmp_path):
    path = tmp_path / "wal.log"
    log, _ = WriteAheadLog.open(path)
    log.append_entry(b"a", b"1")
    log.sync()
    log.append_entry(b"b", b"2")
    log.abandon()
    assert [r.key for r in wal_replay(path)] == [b"a"]


def test_reopen_continues_numbering(tmp_path):
    path = tmp_path / "wal.log"
    write_log(path, [WalRecord(1, b"a", b"1"), WalRecord(2, b"b", b"2")])
    log, recovered = WriteAheadLog.open(path)
    assert len(recovered) == 2
    assert log.append_entry(b"c", b"3") == 3
    log.close()
    assert [r.seq for r in wal_replay(path)] == [1, 2, 3]


def test_torn_tail_truncated_on_open(tmp_path):
    path = tmp_path / "wal.log"
    records = [WalRecord(1, b"a", b"1"), WalRecord(2, b"b", b"2")]
    write_log(path, records)
    intact = path.stat().st_size
    with open(path, "ab") as fh:
        fh.write(frame(WalRecord(3, b"c", b"3"))[:7])
    log, recovered = WriteAheadLog.open(path)
    log.close()
    assert recovered == records
    assert path.stat().st_size == intact


def test_bad_checksum_stops_replay(tmp_path):
    path = tmp_path / "wal.log"
    records = random_records(random.Random(2), 5)
    write_log(path, records)
    data = bytearray(path.read_bytes())
    third = sum(len(frame(r)) for r in records[:2])
    data[third + 8] ^= 0xFF
    path.write_bytes(bytes(data))
    assert wal_replay(path) == records[:2]


@pytest.mark.parametrize("seed", range(100))
def test_torn_final_frame_at_every_offset(tmp_path, seed):
    rng = random.Random(seed)
    records = random_records(rng, rng.randint(1, 8))
    body = b"".join(frame(r) for r in records)
    last = len(frame(records[-1]))
    path = tmp_path / "wal.log"
    for cut in range(last):
        path.write_bytes(body[: len(body) - last + cut])
        assert wal_replay(path) == records[:-1]
    path.write_bytes(body)
    assert wal_replay(path) == records


def test_module_level_append_and_sync(tmp_path):
    path = tmp_path / "wal.log"
    log, _ = WriteAheadLog.open(path)
    assert wal_append(log, WalRecord(1, b"k", b"v")) == 1
    assert wal_replay(path) == []
    wal_sync(log)
    assert wal_replay(path) == [WalRecord(1, b"k", b"v")]
    log.close()


def test_failed_sync_is_cut_back_and_rolled_back(tmp_path, monkeypatch):
    path = tmp_path / "wal.log"
    log, _ = WriteAheadLog.open(path)
    first = WalRecord(1, b"k1", b"v1")
    log.append(first)
    log.sync()

    real_write = WriteAheadLog._write_pending

    def partial_write(self):
        self._fh.write(bytes(self._pending[:5]))
        self._fh.flush()
        raise OSError(28, "No space left on device")

    monkeypatch.setattr(WriteAheadLog, "_write_pending", partial_write)
    mark = log.mark()
    log.append(WalRecord(2, b"k2", b"lost"))
    with pytest.raises(StoreIOError):
        log.sync()
    log.rollback(mark)
    monkeypatch.setattr(WriteAheadLog, "_write_pending", real_write)

    second = WalRecord(2, b"k2", b"kept")
    log.append(second)
    log.sync()
    log.close()
    assert wal_replay(path) == [first, second]

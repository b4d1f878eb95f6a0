"""
Replay a trace against a fresh store and simulator.
"""

import dataclasses
import logging
import tempfile
from pathlib import Path
from typing import Dict, Optional

from metacache.config import SimConfig, StoreConfig
from metacache.errors import InvalidConfigError, IsDirectoryError, MalformedTraceError, NotFoundError
from metacache.bench.report import Report, ReportRow
from metacache.bench.workload import RUN_KINDS, OpKind, Phase, Trace, TraceOp
from metacache.model.inode import FileType, InodeRecord
from metacache.model.keys import ROOT_KEY
from metacache.storage.store import Store
from metacache.vfs.disk import data_blocks
from metacache.vfs.sim import Sim

logger = logging.getLogger(__name__)

ROOT_INODE = 2


class InodeAllocator:
    """Deterministic inode numbers and data block ids for replayed creates."""

    def __init__(self, block_size: int):
        self.block_size = block_size
        self.next_inode = ROOT_INODE + 1
        self.next_block = 1

    def root(self) -> InodeRecord:
        return InodeRecord(
            inode_number=ROOT_INODE,
            file_type=FileType.DIRECTORY,
            size_bytes=self.block_size,
            permissions=0o755,
            link_count=2,
        )

    def make(self, op: TraceOp, inline: bool) -> InodeRecord:
        ino = self.next_inode
        self.next_inode += 1
        if op.op == OpKind.MKDIR:
            return InodeRecord(
                inode_number=ino,
                file_type=FileType.DIRECTORY,
                size_bytes=self.block_size,
                owner_uid=1000,
                group_gid=1000,
                permissions=0o755,
                link_count=2,
                generation=1,
            )
        refs = ()
        if not inline:
            count = data_blocks(op.size, self.block_size)
            refs = tuple(range(self.next_block, self.next_block + count))
            self.next_block += count
        return InodeRecord(
            inode_number=ino,
            file_type=FileType.REGULAR,
            size_bytes=op.size,
            owner_uid=1000,
            group_gid=1000,
            permissions=0o644,
            link_count=1,
            generation=1,
            block_refs=refs,
        )


def _apply(sim: Sim, alloc: InodeAllocator, op: TraceOp) -> None:
    if op.op == OpKind.STAT:
        sim.stat(op.path)
    elif op.op == OpKind.OPEN_READ:
        sim.open_read(op.path)
    elif op.op == OpKind.UNLINK:
        sim.unlink(op.path)
    elif op.op in (OpKind.CREATE, OpKind.MKDIR):
        payload = bytes(op.size) if op.op == OpKind.CREATE else None
        inline = payload is not None and 0 < len(payload) <= sim.inline_limit
        sim.create(op.path, alloc.make(op, inline), payload)
    else:
        raise MalformedTraceError(f"unsupported op {op.op}")


def _store_config(data_dir: Path, sim_config: SimConfig, base: Optional[StoreConfig]) -> StoreConfig:
    if base is not None:
        config = dataclasses.replace(base, data_dir=data_dir)
    else:
        config = StoreConfig(data_dir=data_dir, sync_every_write=False)
    config.block_size = sim_config.block_size
    return config


def replay(
    trace: Trace,
    sim_config: SimConfig,
    data_dir: Optional[Path] = None,
    store_config: Optional[StoreConfig] = None,
    label: str = "",
) -> Report:
    """
    Seed a fresh store with the trace's setup phase, flush it, boot the
    simulator and run the measured phase.

    NOT_FOUND and IS_DIRECTORY outcomes of run ops land in the errors
    column; they do not abort the replay.

    Args:
        trace: Parsed trace
        sim_config: Simulator configuration
        data_dir: Empty or missing directory for the store; a temporary one if None
        store_config: Store tuning; data_dir and block_size are overridden
        label: Name shown in the report

    Returns:
        The Report of the run phase

    Raises:
        InvalidConfigError: If data_dir is not empty
        MalformedTraceError: If a setup op fails
        StoreIOError: On storage failures
    """
    if data_dir is None:
        with tempfile.TemporaryDirectory(prefix="metacache-") as tmp:
            return replay(trace, sim_config, Path(tmp), store_config, label)

    data_dir = Path(data_dir)
    if data_dir.exists() and any(data_dir.iterdir()):
        raise InvalidConfigError(f"replay data dir {data_dir} is not empty")

    config = _store_config(data_dir, sim_config, store_config)
    alloc = InodeAllocator(sim_config.block_size)
    rows: Dict[str, ReportRow] = {kind.value: ReportRow(kind.value) for kind in RUN_KINDS}

    with Store.open(config) as store:
        store.put(ROOT_KEY, alloc.root())
        seeding = Sim.boot(dataclasses.replace(sim_config, warm_on_boot=False), store)
        for op in trace.ops:
            if op.phase != Phase.SETUP:
                continue
            try:
                _apply(seeding, alloc, op)
            except (NotFoundError, IsDirectoryError) as e:
                raise MalformedTraceError(f"setup op {op.op.value} {op.path} failed: {e}") from e
        store.flush()

        sim = Sim.boot(sim_config, store)
        for op in trace.ops:
            if op.phase != Phase.RUN:
                continue
            row = rows.get(op.op.value)
            if row is None:
                raise MalformedTraceError(f"{op.op.value} is not a run-phase op")
            before = sim.counters()
            try:
                _apply(sim, alloc, op)
            except (NotFoundError, IsDirectoryError):
                row.errors += 1
            after = sim.counters()
            row.calls += 1
            row.cost_units += after.cost_units - before.cost_units
            row.block_reads += after.block_reads - before.block_reads
            row.seeks += after.seeks - before.seeks

    report = Report(
        rows=list(rows.values()),
        trace_header=trace.header,
        config=sim_config.to_dict(),
        label=label,
    )
    total = report.total
    logger.info(
        f"Replayed {total.calls} ops ({label or 'unlabelled'}): "
        f"{total.cost_units} cost units, {total.block_reads} block reads"
    )
    return report

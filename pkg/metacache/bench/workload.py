"""
Workload specification, trace generation and the trace file format.

Traces are JSON lines: one header record, then one record per operation.
Randomness comes from ``random.Random(seed)`` (MT19937) using only
``random()``, ``randint()`` and ``choice()``/``randrange()``, whose outputs are
fixed for a given seed across platforms.
"""

import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, TextIO, Tuple, Union

from metacache.errors import InvalidSpecError, MalformedTraceError, StoreIOError
from metacache.utils.parsing import dump_json_line, parse_trace_line

logger = logging.getLogger(__name__)

TRACE_FORMAT = 1


class OpKind(str, Enum):
    STAT = "STAT"
    OPEN_READ = "OPEN_READ"
    CREATE = "CREATE"
    UNLINK = "UNLINK"
    MKDIR = "MKDIR"


RUN_KINDS = (OpKind.STAT, OpKind.OPEN_READ, OpKind.CREATE, OpKind.UNLINK)

DEFAULT_MIX = {
    OpKind.STAT.value: 0.55,
    OpKind.OPEN_READ.value: 0.21,
    OpKind.CREATE.value: 0.18,
    OpKind.UNLINK.value: 0.06,
}


class Phase(str, Enum):
    SETUP = "setup"
    RUN = "run"


@dataclass
class WorkloadSpec:
    num_files: int = 1000
    dir_fanout: int = 4
    tree_depth: int = 3
    op_count: int = 10000
    op_mix: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_MIX))
    file_size_dist: Tuple[int, int] = (128, 8192)
    seed: int = 42

    def validate(self) -> "WorkloadSpec":
        """
        Raises:
            InvalidSpecError: On non-positive counts, unknown op kinds, a bad
                size range, or fractions that do not sum to 1
        """
        for name in ("num_files", "dir_fanout", "tree_depth", "op_count"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise InvalidSpecError(f"{name} must be a positive integer, got {value!r}")
        run_names = {kind.value for kind in RUN_KINDS}
        for name, fraction in self.op_mix.items():
            if name not in run_names:
                raise InvalidSpecError(f"unknown op kind in mix: {name}")
            if fraction < 0:
                raise InvalidSpecError(f"negative fraction for {name}")
        if abs(sum(self.op_mix.values()) - 1.0) > 1e-9:
            raise InvalidSpecError(f"op mix sums to {sum(self.op_mix.values())}, expected 1")
        low, high = self.file_size_dist
        if low < 0 or high < low:
            raise InvalidSpecError(f"bad file size range {self.file_size_dist}")
        return self

    def to_dict(self) -> dict:
        return {
            "num_files": self.num_files,
            "dir_fanout": self.dir_fanout,
            "tree_depth": self.tree_depth,
            "op_count": self.op_count,
            "op_mix": {name: self.op_mix[name] for name in sorted(self.op_mix)},
            "file_size_dist": list(self.file_size_dist),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WorkloadSpec":
        try:
            return cls(
                num_files=data["num_files"],
                dir_fanout=data["dir_fanout"],
                tree_depth=data["tree_depth"],
                op_count=data["op_count"],
                op_mix=dict(data["op_mix"]),
                file_size_dist=tuple(data["file_size_dist"]),
                seed=data["seed"],
            )
        except (KeyError, TypeError) as e:
            raise MalformedTraceError(f"trace header has a bad spec: {e}") from e


@dataclass(frozen=True)
class TraceOp:
    op: OpKind
    path: str
    size: int = 0
    phase: Phase = Phase.RUN

    def to_dict(self) -> dict:
        return {"op": self.op.value, "path": self.path, "size": self.size, "phase": self.phase.value}


@dataclass
class Trace:
    header: dict
    ops: List[TraceOp]

    @property
    def setup_ops(self) -> List[TraceOp]:
        return [op for op in self.ops if op.phase == Phase.SETUP]

    @property
    def run_ops(self) -> List[TraceOp]:
        return [op for op in self.ops if op.phase == Phase.RUN]


def make_header(spec: WorkloadSpec, setup_ops: int, run_ops: int) -> dict:
    return {
        "type": "header",
        "format": TRACE_FORMAT,
        "seed": spec.seed,
        "spec": spec.to_dict(),
        "setup_ops": setup_ops,
        "run_ops": run_ops,
    }


def _join(parent: str, name: str) -> str:
    return f"/{name}" if parent == "/" else f"{parent}/{name}"


class _LiveFiles:
    """Live file paths with O(1) random pick and removal."""

    def __init__(self):
        self.paths: List[str] = []
        self.index: Dict[str, int] = {}

    def __len__(self) -> int:
        return len(self.paths)

    def add(self, path: str) -> None:
        self.index[path] = len(self.paths)
        self.paths.append(path)

    def pick(self, rng: random.Random) -> str:
        return self.paths[rng.randrange(len(self.paths))]

    def remove(self, path: str) -> None:
        idx = self.index.pop(path)
        last = self.paths.pop()
        if idx < len(self.paths):
            self.paths[idx] = last
            self.index[last] = idx


def generate(spec: WorkloadSpec) -> Trace:
    """
    Build a deterministic trace from a spec.

    The setup phase creates a ``dir_fanout ** level`` directory tree down to
    ``tree_depth`` and ``num_files`` files in its leaf directories. The run
    phase draws ``op_count`` operations from ``op_mix`` over the live files;
    UNLINK removes a file from the live set, so no path is unlinked twice.

    Raises:
        InvalidSpecError: If the spec is invalid
    """
    spec.validate()
    rng = random.Random(spec.seed)
    low, high = spec.file_size_dist
    ops: List[TraceOp] = []

    level = ["/"]
    for _ in range(spec.tree_depth):
        level = [_join(parent, f"d{i}") for parent in level for i in range(spec.dir_fanout)]
        ops.extend(TraceOp(OpKind.MKDIR, path, 0, Phase.SETUP) for path in level)
    leaves = level

    live = _LiveFiles()
    counter = 0

    def new_file() -> Tuple[str, int]:
        nonlocal counter
        counter += 1
        path = _join(rng.choice(leaves), f"f{counter:07d}")
        return path, rng.randint(low, high)

    for _ in range(spec.num_files):
        path, size = new_file()
        ops.append(TraceOp(OpKind.CREATE, path, size, Phase.SETUP))
        live.add(path)
    setup_count = len(ops)

    kinds = [kind for kind in RUN_KINDS if spec.op_mix.get(kind.value, 0) > 0]
    cumulative = []
    total = 0.0
    for kind in kinds:
        total += spec.op_mix[kind.value]
        cumulative.append(total)

    for _ in range(spec.op_count):
        r = rng.random() * total
        kind = kinds[-1]
        for candidate, bound in zip(kinds, cumulative):
            if r < bound:
                kind = candidate
                break
        if kind != OpKind.CREATE and not live:
            kind = OpKind.CREATE

        if kind == OpKind.CREATE:
            path, size = new_file()
            ops.append(TraceOp(OpKind.CREATE, path, size))
            live.add(path)
        elif kind == OpKind.UNLINK:
            path = live.pick(rng)
            live.remove(path)
            ops.append(TraceOp(OpKind.UNLINK, path))
        else:
            ops.append(TraceOp(kind, live.pick(rng)))

    header = make_header(spec, setup_count, len(ops) - setup_count)
    logger.info(f"Generated trace: {setup_count} setup ops, {len(ops) - setup_count} run ops")
    return Trace(header, ops)


def write_trace(trace: Trace, out: Union[Path, str, TextIO]) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            write_trace(trace, fh)
        return
    out.write(dump_json_line(trace.header))
    for op in trace.ops:
        out.write(dump_json_line(op.to_dict()))


def trace_to_text(trace: Trace) -> str:
    return dump_json_line(trace.header) + "".join(dump_json_line(op.to_dict()) for op in trace.ops)


def parse_trace(lines: Iterable[str]) -> Trace:
    """
    Parse trace lines (header first).

    Raises:
        MalformedTraceError: On a missing header, bad JSON or an invalid record
    """
    header = None
    ops: List[TraceOp] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        record = parse_trace_line(line, line_no)
        if header is None:
            if record.get("type") != "header":
                raise MalformedTraceError(f"line {line_no}: first record must be the header")
            header = record
            continue
        try:
            op = TraceOp(
                op=OpKind(record["op"]),
                path=str(record["path"]),
                size=int(record.get("size", 0)),
                phase=Phase(record.get("phase", Phase.RUN.value)),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise MalformedTraceError(f"line {line_no}: bad op record: {e}") from e
        if not op.path.startswith("/") or op.size < 0:
            raise MalformedTraceError(f"line {line_no}: bad path or size")
        ops.append(op)
    if header is None:
        raise MalformedTraceError("trace has no header")
    return Trace(header, ops)


def read_trace(path: Union[Path, str]) -> Trace:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_trace(fh)
    except OSError as e:
        raise StoreIOError(f"cannot read trace {path}: {e}") from e


def op_fractions(trace: Trace) -> Dict[str, float]:
    """Observed fraction of each run-phase op kind."""
    run = trace.run_ops
    if not run:
        return {}
    counts: Dict[str, int] = {}
    for op in run:
        counts[op.op.value] = counts.get(op.op.value, 0) + 1
    return {name: count / len(run) for name, count in sorted(counts.items())}


def fanout_dirs(spec: WorkloadSpec) -> int:
    """Directories the setup phase creates."""
    return sum(spec.dir_fanout ** level for level in range(1, spec.tree_depth + 1))

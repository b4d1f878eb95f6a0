"""
Command line benchmark tool.

    python -m metacache generate --files 1000 --ops 10000 --out trace.jsonl
    python -m metacache replay trace.jsonl --baseline --format json --out base.json
    python -m metacache replay trace.jsonl --format json --out mc.json
    python -m metacache compare base.json mc.json
    python -m metacache demo
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from metacache import __version__
from metacache.bench.replay import replay
from metacache.bench.report import FORMATS, Report, compare_runs, render_report
from metacache.bench.workload import DEFAULT_MIX, WorkloadSpec, generate, read_trace, trace_to_text
from metacache.config import LOG_FORMAT, LOG_LEVEL, SimConfig, StoreConfig
from metacache.errors import MetaCacheError, StoreIOError
from metacache.utils.parsing import parse_op_mix

logger = logging.getLogger("metacache.cli")


def _add_spec_args(parser: argparse.ArgumentParser) -> None:
    defaults = WorkloadSpec()
    group = parser.add_argument_group("workload")
    group.add_argument("--files", type=int, default=defaults.num_files, dest="num_files",
                       help="files created by the setup phase")
    group.add_argument("--fanout", type=int, default=defaults.dir_fanout, dest="dir_fanout",
                       help="subdirectories per directory")
    group.add_argument("--depth", type=int, default=defaults.tree_depth, dest="tree_depth",
                       help="directory tree depth")
    group.add_argument("--ops", type=int, default=defaults.op_count, dest="op_count",
                       help="measured operations")
    group.add_argument("--mix", type=str, default=None,
                       help="op mix, e.g. STAT=0.55,OPEN_READ=0.21,CREATE=0.18,UNLINK=0.06")
    group.add_argument("--min-size", type=int, default=defaults.file_size_dist[0])
    group.add_argument("--max-size", type=int, default=defaults.file_size_dist[1])
    group.add_argument("--seed", type=int, default=defaults.seed)


def _add_sim_args(parser: argparse.ArgumentParser) -> None:
    defaults = SimConfig()
    group = parser.add_argument_group("simulator")
    group.add_argument("--icache-capacity", type=int, default=defaults.icache_capacity)
    group.add_argument("--metacache", action=argparse.BooleanOptionalAction,
                       default=defaults.metacache_enabled)
    group.add_argument("--warm", action=argparse.BooleanOptionalAction,
                       default=defaults.warm_on_boot, help="warm load MetaCache at boot")
    group.add_argument("--inline-threshold", type=int, default=defaults.inline_threshold,
                       help="largest file stored inside its metadata record, 0 disables")
    group.add_argument("--block-size", type=int, default=defaults.block_size)
    group.add_argument("--baseline", action="store_true",
                       help="plain filesystem: MetaCache, warm boot and co-location off")


def _add_output_args(parser: argparse.ArgumentParser, formats=True) -> None:
    if formats:
        parser.add_argument("--format", choices=FORMATS, default="table")
    parser.add_argument("--out", type=Path, default=None, help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metacache",
        description="MetaCache metadata-lookup benchmark",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("generate", help="write a workload trace")
    _add_spec_args(gen)
    _add_output_args(gen, formats=False)

    rep = subs.add_parser("replay", help="replay a trace and print a report")
    rep.add_argument("trace", type=Path)
    _add_sim_args(rep)
    _add_output_args(rep)
    rep.add_argument("--data-dir", type=Path, default=None,
                     help="empty directory for the replay store (temporary if omitted)")
    rep.add_argument("--label", type=str, default="")

    cmp_ = subs.add_parser("compare", help="compare two JSON reports of the same trace")
    cmp_.add_argument("a", type=Path)
    cmp_.add_argument("b", type=Path)
    _add_output_args(cmp_)

    demo = subs.add_parser("demo", help="baseline vs MetaCache on a generated trace")
    _add_spec_args(demo)
    _add_output_args(demo)
    demo.add_argument("--icache-capacity", type=int, default=SimConfig().icache_capacity)
    demo.add_argument("--data-dir", type=Path, default=None)
    return parser


def spec_from_args(args: argparse.Namespace) -> WorkloadSpec:
    mix = parse_op_mix(args.mix) if args.mix else dict(DEFAULT_MIX)
    return WorkloadSpec(
        num_files=args.num_files,
        dir_fanout=args.dir_fanout,
        tree_depth=args.tree_depth,
        op_count=args.op_count,
        op_mix=mix,
        file_size_dist=(args.min_size, args.max_size),
        seed=args.seed,
    )


def sim_config_from_args(args: argparse.Namespace) -> SimConfig:
    if args.baseline:
        return SimConfig.baseline(
            icache_capacity=args.icache_capacity,
            block_size=args.block_size,
        )
    return SimConfig(
        icache_capacity=args.icache_capacity,
        metacache_enabled=args.metacache,
        warm_on_boot=args.warm,
        inline_threshold=args.inline_threshold,
        block_size=args.block_size,
    )


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise StoreIOError(f"cannot write {out}: {e}") from e
    logger.info(f"Wrote {out}")


def _read_report(path: Path) -> Report:
    try:
        return Report.from_json(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise StoreIOError(f"cannot read report {path}: {e}") from e


def _store_config() -> StoreConfig:
    config = StoreConfig.from_env()
    config.sync_every_write = False
    return config


def cmd_generate(args: argparse.Namespace) -> int:
    trace = generate(spec_from_args(args))
    _emit(trace_to_text(trace), args.out)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    trace = read_trace(args.trace)
    sim_config = sim_config_from_args(args)
    label = args.label or ("baseline" if not sim_config.metacache_enabled else "metacache")
    report = replay(trace, sim_config, args.data_dir, _store_config(), label)
    _emit(render_report(report, args.format), args.out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    a = _read_report(args.a)
    b = _read_report(args.b)
    _emit(compare_runs(a, b, args.format), args.out)
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    trace = generate(spec_from_args(args))
    store_config = _store_config()
    runs = [
        ("baseline", SimConfig.baseline(icache_capacity=args.icache_capacity)),
        ("metacache", SimConfig(icache_capacity=args.icache_capacity)),
    ]
    reports = []
    for label, sim_config in runs:
        data_dir = args.data_dir / label if args.data_dir is not None else None
        reports.append(replay(trace, sim_config, data_dir, store_config, label))

    if args.format == "json":
        doc = {
            "reports": [r.to_dict() for r in reports],
            "comparison": json.loads(compare_runs(reports[0], reports[1], "json")),
        }
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
        return 0
    parts = [render_report(r, args.format) for r in reports]
    parts.append(compare_runs(reports[0], reports[1], args.format))
    _emit("\n".join(parts), args.out)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "replay": cmd_replay,
    "compare": cmd_compare,
    "demo": cmd_demo,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run the CLI.

    Returns:
        Process exit status: 0 on success, the error's exit_code otherwise
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, LOG_LEVEL, logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except MetaCacheError as e:
        print(f"error: {e.code}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""
API routes for the MetaCache inspection service.
"""

import logging
import tempfile
from pathlib import Path

from fastapi import APIRouter, File, Form, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse, PlainTextResponse

from metacache import __version__
from metacache.bench.replay import replay
from metacache.bench.report import FORMATS, render_report
from metacache.bench.workload import parse_trace
from metacache.config import SimConfig
from metacache.errors import (
    InvalidConfigError,
    InvalidInodeError,
    InvalidNameError,
    InvalidParentError,
    InvalidSpecError,
    IsDirectoryError,
    MalformedTraceError,
    MetaCacheError,
    NotFoundError,
)
from metacache.model.keys import key_for_path, normalize_path
from metacache.storage.store import Store

logger = logging.getLogger(__name__)

router = APIRouter()

VALIDATION_ERRORS = (
    InvalidNameError,
    InvalidParentError,
    InvalidInodeError,
    InvalidConfigError,
    InvalidSpecError,
    MalformedTraceError,
    IsDirectoryError,
)


def http_error(e: MetaCacheError) -> HTTPException:
    """Map a store error to an HTTP status."""
    if isinstance(e, NotFoundError):
        status = 404
    elif isinstance(e, VALIDATION_ERRORS):
        status = 400
    else:
        logger.error(f"Store error: {e}", exc_info=True)
        status = 500
    return HTTPException(status_code=status, detail={"code": e.code, "message": str(e)})


def _store(request: Request) -> Store:
    return request.app.state.store


def _counters(store: Store) -> dict:
    doc = store.snapshot_counters().to_dict()
    doc["table_count"] = len(store.tables)
    doc["memtable_entries"] = len(store.memtable)
    doc["warm_loaded"] = store.warm_loaded
    return doc


@router.get("/")
async def root(request: Request):
    """Service name, version and data directory"""
    return {
        "service": "metacache",
        "version": __version__,
        "data_dir": str(_store(request).data_dir),
    }


@router.get("/api/stat")
async def stat(request: Request, path: str):
    """
    Look up one path.

    Returns the inode, the inline data length and the tier that served it.
    """
    try:
        key = key_for_path(path)
        record, cost = _store(request).get(key)
        if record is None:
            raise NotFoundError(f"{key.path} not found")
    except MetaCacheError as e:
        raise http_error(e)
    return {
        "path": key.path,
        "inode": record.inode.to_dict(),
        "inline_bytes": len(record.inline_data) if record.inline_data is not None else None,
        "tier": cost.tier.value,
        "blocks_read": cost.blocks_read,
    }


@router.get("/api/ls")
async def ls(request: Request, path: str = "/"):
    """Ordered listing of a directory's live children"""
    try:
        parent = normalize_path(path)
        listing = _store(request).list_dir(parent)
    except MetaCacheError as e:
        raise http_error(e)
    return {
        "path": parent,
        "entries": [
            {"name": entry.key.name, "path": entry.key.path, "inode_number": entry.child_inode}
            for entry in listing
        ],
    }


@router.get("/api/counters")
async def counters(request: Request):
    return _counters(_store(request))


@router.post("/api/flush")
async def flush(request: Request):
    store = _store(request)
    try:
        store.flush()
    except MetaCacheError as e:
        raise http_error(e)
    return _counters(store)


@router.post("/api/compact")
async def compact(request: Request):
    store = _store(request)
    try:
        store.compact()
    except MetaCacheError as e:
        raise http_error(e)
    return _counters(store)


@router.post("/api/warm")
async def warm(request: Request):
    """Load every table into the warm cache"""
    try:
        loaded = _store(request).warm_load()
    except MetaCacheError as e:
        raise http_error(e)
    return {"loaded": loaded}


@router.post("/api/replay")
async def replay_trace(
    file: UploadFile = File(...),
    metacache: str = Form("true"),
    warm: str = Form("true"),
    icache_capacity: int = Form(1024),
    format: str = Form("json"),
):
    """
    Replay an uploaded trace in a scratch store and return the report.

    The live store is not touched.
    """
    if format not in FORMATS:
        raise HTTPException(status_code=400, detail=f"format must be one of {', '.join(FORMATS)}")

    use_metacache = metacache.lower() == "true"
    if use_metacache:
        sim_config = SimConfig(icache_capacity=icache_capacity, warm_on_boot=warm.lower() == "true")
    else:
        sim_config = SimConfig.baseline(icache_capacity=icache_capacity)

    try:
        text = (await file.read()).decode("utf-8")
        trace = parse_trace(text.splitlines())
        with tempfile.TemporaryDirectory(prefix="metacache-replay-") as tmp:
            report = replay(trace, sim_config, Path(tmp) / "store",
                            label="metacache" if use_metacache else "baseline")
    except UnicodeDecodeError:
        raise HTTPException(status_code=400, detail="trace must be UTF-8 JSON lines")
    except MetaCacheError as e:
        raise http_error(e)

    if format == "json":
        return JSONResponse(report.to_dict())
    return PlainTextResponse(render_report(report, format))

import logging
import os
import subprocess
import sys
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from metacache.bench.workload import WorkloadSpec, generate, trace_to_text
from metacache.config import StoreConfig
from metacache.main import create_app
from metacache.model.keys import ROOT_KEY, key_for_path
from tests.factories import make_dir, make_inode


@pytest.fixture
def client(tmp_path):
    app = create_app(StoreConfig(data_dir=tmp_path / "store"))
    with TestClient(app) as c:
        store = app.state.store
        store.put(ROOT_KEY, make_dir(2))
        store.put(key_for_path("/etc"), make_dir(3))
        store.put(key_for_path("/etc/hosts"), make_inode(4, size=5), b"hosts")
        store.put(key_for_path("/etc/passwd"), make_inode(5, size=900))
        yield c


def test_root(client):
    body = client.get("/").json()
    assert body["service"] == "metacache"


def test_stat(client):
    body = client.get("/api/stat", params={"path": "/etc/hosts"}).json()
    assert body["inode"]["inode_number"] == 4
    assert body["inline_bytes"] == 5
    assert body["tier"] == "memtable"


def test_stat_missing_is_404(client):
    response = client.get("/api/stat", params={"path": "/etc/shadow"})
    assert response.status_code == 404
    assert response.json()["detail"]["code"] == "NOT_FOUND"


def test_stat_relative_path_is_400(client):
    assert client.get("/api/stat", params={"path": "etc"}).status_code == 400


def test_ls(client):
    body = client.get("/api/ls", params={"path": "/etc/"}).json()
    assert body["path"] == "/etc"
    assert [e["name"] for e in body["entries"]] == ["hosts", "passwd"]
    assert [e["inode_number"] for e in body["entries"]] == [4, 5]
    assert body["entries"][0]["path"] == "/etc/hosts"


def test_flush_compact_warm(client):
    assert client.post("/api/flush").json()["table_count"] == 1
    assert client.post("/api/compact").json()["table_count"] == 1
    assert client.post("/api/warm").json()["loaded"] == 4
    body = client.get("/api/stat", params={"path": "/etc/passwd"}).json()
    assert body["tier"] == "warm"
    assert client.get("/api/counters").json()["warm_loaded"] is True


def test_replay_upload(client):
    trace = generate(WorkloadSpec(num_files=20, dir_fanout=2, tree_depth=2, op_count=50, seed=1))
    files = {"file": ("trace.jsonl", trace_to_text(trace), "application/x-ndjson")}
    body = client.post("/api/replay", files=files, data={"metacache": "false"}).json()
    assert body["label"] == "baseline"
    assert body["total"]["calls"] == 50

    table = client.post("/api/replay", files=files, data={"format": "table"})
    assert table.text.splitlines()[1] == "% TIME  SECONDS  USECS/CALL  CALLS  ERRORS  SYSCALL"


def test_replay_rejects_bad_trace(client):
    files = {"file": ("trace.jsonl", "nope\n", "application/x-ndjson")}
    assert client.post("/api/replay", files=files).status_code == 400


def test_importing_app_configures_logging(tmp_path):
    code = (
        "import logging, metacache.main; "
        "root = logging.getLogger(); "
        "print(len(root.handlers), root.level)"
    )
    env = {**os.environ, "METACACHE_LOG_LEVEL": "debug", "METACACHE_DATA_DIR": str(tmp_path)}
    result = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        check=True,
        cwd=Path(__file__).resolve().parents[1],
        env=env,
    )
    handlers, level = result.stdout.split()
    assert int(handlers) >= 1
    assert int(level) == logging.DEBUG

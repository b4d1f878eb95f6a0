import csv
import io
import json

import pytest

from metacache.bench.report import TABLE_HEADER, Report, ReportRow, compare_runs, render_report
from metacache.errors import MalformedTraceError, TraceMismatchError


def sample_report(label="run", header=None) -> Report:
    return Report(
        rows=[
            ReportRow("STAT", calls=55, errors=1, cost_units=5500, block_reads=40, seeks=40),
            ReportRow("OPEN_READ", calls=21, errors=0, cost_units=4200, block_reads=30, seeks=21),
            ReportRow("CREATE", calls=18, errors=0, cost_units=18, block_reads=0, seeks=0),
            ReportRow("UNLINK", calls=6, errors=2, cost_units=7, block_reads=0, seeks=0),
        ],
        trace_header=header or {"type": "header", "seed": 1},
        config={"metacache_enabled": True},
        label=label,
    )


def test_table_header_is_exact():
    lines = render_report(sample_report(), "table").splitlines()
    assert lines[0] == "# run"
    assert lines[1] == TABLE_HEADER == "% TIME  SECONDS  USECS/CALL  CALLS  ERRORS  SYSCALL"


def test_pct_time_sums_to_100():
    report = sample_report()
    assert sum(report.pct_time(row) for row in report.rows) == pytest.approx(100.0, abs=0.1)
    doc = report.to_dict()
    assert sum(row["pct_time"] for row in doc["rows"]) == pytest.approx(100.0, abs=0.1)


def test_total_row():
    total = sample_report().total
    assert total.calls == 100
    assert total.errors == 3
    assert total.cost_units == 9725
    assert total.units_per_call == 97


def test_seconds_and_usecs_columns():
    row = sample_report().row("STAT")
    assert row.seconds == pytest.approx(0.0055)
    assert row.units_per_call == 100
    line = next(l for l in render_report(sample_report()).splitlines() if l.endswith("STAT"))
    assert line.split() == ["56.56", "0.005500", "100", "55", "1", "STAT"]


def test_csv_and_json_carry_table_values():
    report = sample_report()
    rows = list(csv.DictReader(io.StringIO(render_report(report, "csv"))))
    doc = json.loads(render_report(report, "json"))
    table = render_report(report, "table").splitlines()
    for csv_row, json_row in zip(rows, doc["rows"] + [doc["total"]]):
        assert int(csv_row["calls"]) == json_row["calls"]
        assert int(csv_row["cost_units"]) == json_row["cost_units"]
        assert float(csv_row["pct_time"]) == pytest.approx(json_row["pct_time"])
        line = next(l for l in table if l.split()[-1] == csv_row["syscall"])
        assert line.split()[:5] == [
            csv_row["pct_time"], csv_row["seconds"], csv_row["units_per_call"],
            csv_row["calls"], csv_row["errors"],
        ]


def test_all_zero_report():
    report = Report(rows=[ReportRow(name) for name in ("STAT", "OPEN_READ")])
    text = render_report(report, "table")
    total = next(l for l in text.splitlines() if l.endswith("TOTAL"))
    assert total.split()[3] == "0"
    assert all(report.pct_time(row) == 0 for row in report.rows)


def test_json_round_trip_feeds_compare():
    report = sample_report()
    again = Report.from_json(render_report(report, "json"))
    assert again.total.cost_units == report.total.cost_units
    assert again.trace_header == report.trace_header


def test_from_json_rejects_garbage():
    with pytest.raises(MalformedTraceError):
        Report.from_json("not json")
    with pytest.raises(MalformedTraceError):
        Report.from_json('{"rows": [{"syscall": "STAT"}]}')


def test_identical_reports_compare_to_zero():
    out = json.loads(compare_runs(sample_report("a"), sample_report("b"), "json"))
    assert all(entry["delta"] == 0 for entry in out["rows"])
    assert all(entry["winner"] == "tie" for entry in out["rows"])


def test_lower_cost_wins():
    a = sample_report("baseline")
    b = sample_report("metacache")
    b.rows[0].cost_units = 500
    rows = json.loads(compare_runs(a, b, "json"))["rows"]
    total = next(r for r in rows if r["syscall"] == "TOTAL" and r["metric"] == "cost_units")
    assert total["delta"] == -5000
    assert total["winner"] == "metacache"
    assert total["ratio"] == f"{4725 / 9725:.4f}"


def test_same_labels_fall_back_to_a_and_b():
    a = sample_report("metacache")
    b = sample_report("metacache")
    b.rows[0].cost_units = 500
    out = json.loads(compare_runs(a, b, "json"))
    assert (out["a"], out["b"]) == ("a", "b")
    total = next(r for r in out["rows"] if r["syscall"] == "TOTAL" and r["metric"] == "cost_units")
    assert total["winner"] == "b"


def test_mismatched_traces_refused():
    with pytest.raises(TraceMismatchError):
        compare_runs(sample_report(header={"seed": 1}), sample_report(header={"seed": 2}))


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        render_report(sample_report(), "xml")

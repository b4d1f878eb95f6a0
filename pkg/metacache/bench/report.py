"""
Benchmark reports in the strace summary layout, plus run comparison.

The SECONDS column carries simulated cost units scaled by 1e-6 and USECS/CALL
carries cost units per call; no wall-clock time is ever measured.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from metacache.errors import MalformedTraceError, TraceMismatchError

TABLE_HEADER = "% TIME  SECONDS  USECS/CALL  CALLS  ERRORS  SYSCALL"
TABLE_RULE = "------  -------  ----------  -----  ------  -------"
FORMATS = ("table", "csv", "json")

ROW_FIELDS = ["syscall", "pct_time", "seconds", "units_per_call", "calls", "errors",
              "cost_units", "block_reads", "seeks"]


@dataclass
class ReportRow:
    syscall: str
    calls: int = 0
    errors: int = 0
    cost_units: int = 0
    block_reads: int = 0
    seeks: int = 0

    @property
    def units_per_call(self) -> int:
        return round(self.cost_units / self.calls) if self.calls else 0

    @property
    def seconds(self) -> float:
        return self.cost_units * 1e-6

    def add(self, other: "ReportRow") -> None:
        self.calls += other.calls
        self.errors += other.errors
        self.cost_units += other.cost_units
        self.block_reads += other.block_reads
        self.seeks += other.seeks


@dataclass
class Report:
    rows: List[ReportRow]
    trace_header: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    label: str = ""

    @property
    def total(self) -> ReportRow:
        total = ReportRow("TOTAL")
        for row in self.rows:
            total.add(row)
        return total

    def row(self, syscall: str) -> Optional[ReportRow]:
        for row in self.rows:
            if row.syscall == syscall:
                return row
        return None

    def pct_time(self, row: ReportRow) -> float:
        total = self.total.cost_units
        return 100.0 * row.cost_units / total if total else 0.0

    def _values(self, row: ReportRow) -> Dict:
        return {
            "syscall": row.syscall,
            "pct_time": round(self.pct_time(row), 2),
            "seconds": round(row.seconds, 6),
            "units_per_call": row.units_per_call,
            "calls": row.calls,
            "errors": row.errors,
            "cost_units": row.cost_units,
            "block_reads": row.block_reads,
            "seeks": row.seeks,
        }

    def to_dict(self) -> Dict:
        return {
            "label": self.label,
            "trace_header": self.trace_header,
            "config": self.config,
            "rows": [self._values(row) for row in self.rows],
            "total": self._values(self.total),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "Report":
        try:
            rows = [
                ReportRow(
                    syscall=row["syscall"],
                    calls=row["calls"],
                    errors=row["errors"],
                    cost_units=row["cost_units"],
                    block_reads=row["block_reads"],
                    seeks=row["seeks"],
                )
                for row in data["rows"]
            ]
            return cls(rows, data.get("trace_header", {}), data.get("config", {}), data.get("label", ""))
        except (KeyError, TypeError) as e:
            raise MalformedTraceError(f"not a report document: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "Report":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise MalformedTraceError(f"report is not valid JSON: {e}") from e


def _table_line(values: Dict) -> str:
    return (
        f"{values['pct_time']:6.2f}  {values['seconds']:.6f}  {values['units_per_call']:10d}  "
        f"{values['calls']:5d}  {values['errors']:6d}  {values['syscall']}"
    )


def render_report(r: Report, format: str = "table") -> str:
    """
    Render a report.

    Args:
        r: The report
        format: "table" (strace layout), "csv" or "json"

    Returns:
        Text ending in a newline
    """
    doc = r.to_dict()
    if format == "json":
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=ROW_FIELDS, lineterminator="\n")
        writer.writeheader()
        for values in doc["rows"] + [doc["total"]]:
            writer.writerow({
                **values,
                "pct_time": f"{values['pct_time']:.2f}",
                "seconds": f"{values['seconds']:.6f}",
            })
        return buf.getvalue()
    if format != "table":
        raise ValueError(f"unknown report format: {format}")

    lines = []
    if r.label:
        lines.append(f"# {r.label}")
    lines.append(TABLE_HEADER)
    lines.append(TABLE_RULE)
    lines.extend(_table_line(values) for values in doc["rows"])
    lines.append(TABLE_RULE)
    lines.append(_table_line(doc["total"]))
    total = doc["total"]
    lines.append(f"# block reads: {total['block_reads']}, seeks: {total['seeks']}, "
                 f"cost units: {total['cost_units']}")
    lines.append(f"# config: {json.dumps(r.config, sort_keys=True)}")
    return "\n".join(lines) + "\n"


COMPARE_METRICS = ("cost_units", "block_reads", "seeks", "units_per_call", "errors")
COMPARE_FIELDS = ["syscall", "metric", "a", "b", "delta", "ratio", "winner"]


def _compare_rows(name: str, a: Dict, b: Dict, labels) -> List[Dict]:
    out = []
    for metric in COMPARE_METRICS:
        va, vb = a.get(metric, 0), b.get(metric, 0)
        if va == vb:
            winner = "tie"
        else:
            winner = labels[0] if va < vb else labels[1]
        out.append({
            "syscall": name,
            "metric": metric,
            "a": va,
            "b": vb,
            "delta": vb - va,
            "ratio": f"{vb / va:.4f}" if va else "-",
            "winner": winner,
        })
    return out


def compare_runs(a: Report, b: Report, format: str = "table") -> str:
    """
    Compare two reports of the same trace, row by row and in total.

    ``delta`` is b - a and ``ratio`` is b / a; lower values win.

    Raises:
        TraceMismatchError: If the reports come from different traces
    """
    if a.trace_header != b.trace_header:
        raise TraceMismatchError("reports were produced from different traces")
    labels = (a.label or "a", b.label or "b")
    if labels[0] == labels[1]:
        labels = ("a", "b")
    da, db = a.to_dict(), b.to_dict()
    rows_a = {row["syscall"]: row for row in da["rows"]}
    rows_b = {row["syscall"]: row for row in db["rows"]}
    names = [row["syscall"] for row in da["rows"]]
    names += [name for name in rows_b if name not in rows_a]

    entries: List[Dict] = []
    for name in names:
        entries.extend(_compare_rows(name, rows_a.get(name, {}), rows_b.get(name, {}), labels))
    entries.extend(_compare_rows("TOTAL", da["total"], db["total"], labels))

    if format == "json":
        return json.dumps({"a": labels[0], "b": labels[1], "rows": entries}, indent=2, sort_keys=True) + "\n"
    if format == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COMPARE_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(entries)
        return buf.getvalue()
    if format != "table":
        raise ValueError(f"unknown comparison format: {format}")

    lines = [f"# a = {labels[0]}, b = {labels[1]}",
             f"{'SYSCALL':<10}  {'METRIC':<14}  {'A':>12}  {'B':>12}  {'DELTA':>12}  {'RATIO':>8}  WINNER"]
    for e in entries:
        lines.append(
            f"{e['syscall']:<10}  {e['metric']:<14}  {e['a']:>12}  {e['b']:>12}  "
            f"{e['delta']:>12}  {e['ratio']:>8}  {e['winner']}"
        )
    return "\n".join(lines) + "\n"

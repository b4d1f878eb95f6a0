"""
Parsing utilities for trace files and command line values.
"""

import json
from typing import Dict

from metacache.errors import InvalidSpecError, MalformedTraceError


def parse_trace_line(line: str, line_no: int) -> Dict:
    """
    Parse one JSON-lines record of a trace file.

    Args:
        line: Raw line, trailing newline allowed
        line_no: 1-based line number for error messages

    Returns:
        Parsed JSON object

    Raises:
        MalformedTraceError: If the line is not a JSON object
    """
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedTraceError(f"line {line_no}: invalid JSON: {e}") from e
    if not isinstance(record, dict):
        raise MalformedTraceError(f"line {line_no}: expected a JSON object")
    return record


def parse_op_mix(text: str) -> Dict[str, float]:
    """
    Parse ``"STAT=0.55,OPEN_READ=0.21"`` into a fraction map.

    Raises:
        InvalidSpecError: On a malformed pair or a non-numeric fraction
    """
    mix: Dict[str, float] = {}
    for pair in text.split(","):
        pair = pair.strip()
        if not pair:
            continue
        name, sep, value = pair.partition("=")
        if not sep:
            raise InvalidSpecError(f"op mix entry {pair!r} is not NAME=FRACTION")
        try:
            mix[name.strip().upper()] = float(value)
        except ValueError as e:
            raise InvalidSpecError(f"op mix fraction {value!r} is not a number") from e
    return mix


def dump_json_line(record: Dict) -> str:
    """Canonical single-line JSON, so equal records give equal bytes."""
    return json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"

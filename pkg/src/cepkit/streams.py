"""Newline-delimited event input and output-row records.

Input lines look like ``{"type": "Tick", "ts": 1000, "attrs": {...}}``
with ``ts`` in milliseconds. Each line must parse on its own; ordering
and schema conformance are the engine's contract, checked at push time.
Output rows are written one JSON object per line, mirroring
:class:`cepkit.engine.OutputRow` field for field.
"""

from __future__ import annotations

import json
from typing import Iterable

from .engine import OutputRow, TimedEvent
from .errors import StreamFormatError

_RECORD_KEYS = {"type", "ts", "attrs"}


def event_from_data(data: object) -> TimedEvent:
    """Decode one already-parsed record; raises ``ValueError``."""
    if not isinstance(data, dict):
        raise ValueError(f"expected an object, got {type(data).__name__}")
    if set(data) != _RECORD_KEYS:
        missing = _RECORD_KEYS - set(data)
        extra = set(data) - _RECORD_KEYS
        parts = [f"missing {sorted(missing)}" if missing else "",
                 f"unexpected {sorted(extra)}" if extra else ""]
        raise ValueError("bad record keys: " + ", ".join(p for p in parts if p))
    if not isinstance(data["type"], str):
        raise ValueError("'type' must be a string")
    if type(data["ts"]) is not int:
        raise ValueError("'ts' must be an integer millisecond timestamp")
    if not isinstance(data["attrs"], dict):
        raise ValueError("'attrs' must be an object")
    return TimedEvent(data["type"], data["ts"], data["attrs"])


def parse_event_line(line: str, lineno: int) -> TimedEvent:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as err:
        raise StreamFormatError(lineno, f"invalid JSON: {err.msg}") from err
    try:
        return event_from_data(data)
    except ValueError as err:
        raise StreamFormatError(lineno, str(err)) from None


def read_events(text: str) -> list[TimedEvent]:
    """All events in a stream document; blank lines are skipped."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            events.append(parse_event_line(line, lineno))
    return events


def format_event(event: TimedEvent) -> str:
    return json.dumps(
        {"type": event.type_name, "ts": event.timestamp,
         "attrs": dict(event.attrs)},
        ensure_ascii=False,
    )


def format_row(row: OutputRow) -> str:
    return json.dumps(
        {"emitted_at": row.emitted_at, "values": row.values,
         "derived_event_name": row.derived_event_name},
        ensure_ascii=False,
    )


def write_rows(rows: Iterable[OutputRow]) -> str:
    return "".join(format_row(r) + "\n" for r in rows)

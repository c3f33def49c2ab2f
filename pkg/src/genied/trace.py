"""Event traces: the JSONL session log the daemon can record and replay.

One event per line: {"t_ms": int, "event": str, "payload": object}. Event
names are the wire method names (document/didChange, chat/sendMessage, ...)
so a recorded live session replays without translation. Timestamps must be
non-decreasing; replay refuses anything else rather than guessing an order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .errors import MalformedTrace, NonMonotonicTime

KNOWN_EVENTS = frozenset(
    {
        "initialize",
        "document/didOpen",
        "document/didChange",
        "cursor/didMove",
        "chat/typing",
        "chat/sendMessage",
        "suggestions/accept",
        "suggestions/dismiss",
        "suggestions/trigger",
        "config/update",
        "end",
    }
)


@dataclass(frozen=True)
class TraceEvent:
    t_ms: int
    event: str
    payload: dict = field(default_factory=dict)


def parse_trace_line(line: str, line_no: int) -> TraceEvent:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedTrace(f"line {line_no}: not valid JSON: {exc}", line_no=line_no)
    if not isinstance(record, dict):
        raise MalformedTrace(f"line {line_no}: expected an object", line_no=line_no)
    t_ms = record.get("t_ms")
    event = record.get("event")
    payload = record.get("payload", {})
    if not isinstance(t_ms, int) or isinstance(t_ms, bool) or t_ms < 0:
        raise MalformedTrace(
            f"line {line_no}: t_ms must be a non-negative integer", line_no=line_no
        )
    if not isinstance(event, str) or event not in KNOWN_EVENTS:
        raise MalformedTrace(f"line {line_no}: unknown event {event!r}", line_no=line_no)
    if not isinstance(payload, dict):
        raise MalformedTrace(f"line {line_no}: payload must be an object", line_no=line_no)
    return TraceEvent(t_ms=t_ms, event=event, payload=payload)


def load_trace(path: str | Path) -> list[TraceEvent]:
    """Read and validate a whole trace file; empty files are valid traces."""
    events: list[TraceEvent] = []
    last_t = -1
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            ev = parse_trace_line(line, line_no)
            if ev.t_ms < last_t:
                raise NonMonotonicTime(
                    f"line {line_no}: t_ms {ev.t_ms} after {last_t}", line_no=line_no
                )
            last_t = ev.t_ms
            events.append(ev)
    return events


def dump_event(ev: TraceEvent) -> str:
    return json.dumps(
        {"t_ms": ev.t_ms, "event": ev.event, "payload": ev.payload},
        sort_keys=True,
        ensure_ascii=False,
    )


class TraceRecorder:
    """Append-only JSONL writer for live sessions.

    The first recorded event pins t=0; later timestamps are offsets from it,
    so recordings replay identically no matter when they were captured.
    """

    def __init__(self, sink: IO[str]):
        self._sink = sink
        self._epoch: int | None = None

    def record(self, at_ms: int, event: str, payload: dict | None = None) -> None:
        if event not in KNOWN_EVENTS:
            return  # daemon-internal events are not part of the trace format
        if self._epoch is None:
            self._epoch = at_ms
        ev = TraceEvent(t_ms=at_ms - self._epoch, event=event, payload=payload or {})
        self._sink.write(dump_event(ev) + "\n")
        self._sink.flush()


def write_trace(path: str | Path, events: Iterable[TraceEvent]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(dump_event(ev) + "\n")

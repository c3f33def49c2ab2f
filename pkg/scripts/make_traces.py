"""Regenerate the canned traces under tests/traces/.

Three fixtures: an empty trace, a single code change, and a 60-second
typing burst. Replay expectations under default config: 0 / 1 / 1 proactive
requests, firing at -, 5000 ms, 65000 ms.
"""
from __future__ import annotations

from pathlib import Path

from genied.trace import TraceEvent, write_trace

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "traces"

URI = "file:///demo/main.py"
BASE_TEXT = "def main():\n    pass\n"


def single_change() -> list[TraceEvent]:
    return [
        TraceEvent(0, "document/didOpen", {"uri": URI, "text": BASE_TEXT, "version": 0}),
        TraceEvent(
            0,
            "document/didChange",
            {"uri": URI, "start": len(BASE_TEXT), "end": len(BASE_TEXT), "text": "x = 1\n"},
        ),
        TraceEvent(10_000, "end", {}),
    ]


def typing_burst() -> list[TraceEvent]:
    events = [
        TraceEvent(0, "document/didOpen", {"uri": URI, "text": BASE_TEXT, "version": 0})
    ]
    offset = len(BASE_TEXT)
    for i in range(61):  # one change per second, t = 0 .. 60000
        insert = f"# {i}\n"
        events.append(
            TraceEvent(
                i * 1000,
                "document/didChange",
                {"uri": URI, "start": offset, "end": offset, "text": insert},
            )
        )
        offset += len(insert)
    events.append(TraceEvent(70_000, "end", {}))
    return events


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    (OUT_DIR / "empty.jsonl").write_text("", encoding="utf-8")
    write_trace(OUT_DIR / "single_change.jsonl", single_change())
    write_trace(OUT_DIR / "typing_burst.jsonl", typing_burst())
    for name in ("empty.jsonl", "single_change.jsonl", "typing_burst.jsonl"):
        print(f"wrote {OUT_DIR / name}")


if __name__ == "__main__":
    main()

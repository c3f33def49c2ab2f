"""Content-Length framing for the stdio transport.

Each message is ``Content-Length: N\\r\\n`` (other headers tolerated and
ignored), a blank line, then exactly N bytes of UTF-8 JSON. Reading accepts
bare-LF header endings from sloppy clients; writing always emits CRLF.
"""
from __future__ import annotations

from typing import BinaryIO

MAX_FRAME_BYTES = 16 * 1024 * 1024


class FramingError(Exception):
    pass


def read_frame(stream: BinaryIO) -> bytes | None:
    """Read one framed message; returns None on clean EOF at a frame boundary."""
    content_length: int | None = None
    saw_header = False
    while True:
        line = stream.readline()
        if not line:
            if saw_header:
                raise FramingError("EOF inside frame headers")
            return None
        saw_header = True
        stripped = line.rstrip(b"\r\n")
        if stripped == b"":
            break
        name, sep, value = stripped.partition(b":")
        if not sep:
            raise FramingError(f"malformed header line: {line!r}")
        if name.strip().lower() == b"content-length":
            try:
                content_length = int(value.strip())
            except ValueError:
                raise FramingError(f"bad Content-Length: {value!r}") from None
    if content_length is None:
        raise FramingError("missing Content-Length header")
    if not 0 <= content_length <= MAX_FRAME_BYTES:
        raise FramingError(f"unreasonable Content-Length: {content_length}")
    body = stream.read(content_length)
    if body is None or len(body) != content_length:
        raise FramingError("EOF inside frame body")
    return body


def write_frame(stream: BinaryIO, payload: bytes) -> None:
    stream.write(f"Content-Length: {len(payload)}\r\n\r\n".encode("ascii"))
    stream.write(payload)
    stream.flush()

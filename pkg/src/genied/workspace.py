"""Mirrored documents, cursors, and the code-context window around the cursor.

The daemon never re-encodes text: offsets are character offsets in whatever
encoding the client declared, applied verbatim. Documents are immutable
values; every applied change produces a new ``Document`` with the version
bumped by one.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import OutOfRange, UnknownDocument

DEFAULT_WINDOW = 500


@dataclass(frozen=True)
class Document:
    uri: str
    text: str
    version: int = 0


@dataclass(frozen=True)
class Cursor:
    uri: str
    offset: int


@dataclass(frozen=True)
class CodeContext:
    """Up to ``window`` characters on each side of the cursor.

    ``before + after`` is always a contiguous substring of the source
    document; the character under the cursor belongs to ``after``.
    """

    before: str
    after: str
    uri: str
    window: int = DEFAULT_WINDOW


def apply_change(doc: Document, start: int, end: int, new_text: str) -> Document:
    """Replace ``doc.text[start:end]`` with ``new_text``; version increments by 1."""
    if not (0 <= start <= end <= len(doc.text)):
        raise OutOfRange(
            f"change [{start},{end}) outside document of length {len(doc.text)}"
        )
    return Document(
        uri=doc.uri,
        text=doc.text[:start] + new_text + doc.text[end:],
        version=doc.version + 1,
    )


def extract_context(doc: Document, cursor: Cursor, window: int = DEFAULT_WINDOW) -> CodeContext:
    """Slice the context window centered on the cursor, clamped at both ends."""
    if window <= 0:
        raise ValueError("window must be positive")
    if cursor.uri != doc.uri:
        raise OutOfRange(f"cursor uri {cursor.uri!r} does not match document {doc.uri!r}")
    off = cursor.offset
    if not (0 <= off <= len(doc.text)):
        raise OutOfRange(f"cursor offset {off} outside document of length {len(doc.text)}")
    return CodeContext(
        before=doc.text[max(0, off - window) : off],
        after=doc.text[off : min(len(doc.text), off + window)],
        uri=doc.uri,
        window=window,
    )


class DocumentStore:
    """All mirrored documents of one session plus the most recent cursor.

    Mutations are applied serially in event-arrival order by the session
    owner; snapshots hand out the frozen values directly, so readers always
    see a consistent (text, version, cursor) triple.
    """

    def __init__(self) -> None:
        self._docs: dict[str, Document] = {}
        self._cursor: Cursor | None = None

    def open(self, uri: str, text: str, version: int = 0) -> Document:
        doc = Document(uri=uri, text=text, version=version)
        self._docs[uri] = doc
        if self._cursor is not None and self._cursor.uri == uri:
            # Re-opening replaces the text wholesale; clamp a stale cursor.
            self._cursor = Cursor(uri=uri, offset=min(self._cursor.offset, len(text)))
        return doc

    def get(self, uri: str) -> Document:
        try:
            return self._docs[uri]
        except KeyError:
            raise UnknownDocument(f"document not open: {uri}") from None

    def change(self, uri: str, start: int, end: int, new_text: str) -> Document:
        doc = apply_change(self.get(uri), start, end, new_text)
        self._docs[uri] = doc
        self._cursor = self._shift_cursor(uri, start, end, len(new_text))
        return doc

    def _shift_cursor(self, uri: str, start: int, end: int, inserted: int) -> Cursor:
        # Keep the recorded cursor valid through the edit: positions before
        # the change stay put, positions inside it collapse to the end of
        # the inserted text, positions after it shift by the length delta.
        cur = self._cursor
        if cur is None or cur.uri != uri:
            return Cursor(uri=uri, offset=start + inserted)
        if cur.offset <= start:
            return cur
        if cur.offset < end:
            return Cursor(uri=uri, offset=start + inserted)
        return Cursor(uri=uri, offset=cur.offset + inserted - (end - start))

    def move_cursor(self, uri: str, offset: int) -> Cursor:
        doc = self.get(uri)
        if not (0 <= offset <= len(doc.text)):
            raise OutOfRange(f"cursor offset {offset} outside document of length {len(doc.text)}")
        self._cursor = Cursor(uri=uri, offset=offset)
        return self._cursor

    def snapshot(self) -> tuple[Document, Cursor] | None:
        """The current document/cursor pair for prompt assembly, or None."""
        if self._cursor is None:
            return None
        doc = self._docs.get(self._cursor.uri)
        if doc is None:
            return None
        return doc, self._cursor

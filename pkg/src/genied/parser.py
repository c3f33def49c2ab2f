"""Turns raw model text into a validated suggestion group.

Designed to be total: any byte string in, a SuggestionGroup or a typed
error out, never an uncaught exception. Leniency is deliberate and
one-directional: salvage what validates, drop what doesn't, and only fail
when nothing survives.
"""
from __future__ import annotations

import json
import logging
import re

from .errors import EmptyGroup, ParseFailure, SchemaViolation, UnknownType
from .suggestions import Suggestion, SuggestionGroup, resolve_type

log = logging.getLogger(__name__)

MAX_GROUP_SIZE = 3

# A payload wrapped in one markdown code fence, optionally language-tagged.
_FENCE = re.compile(r"\A\s*```[^\n]*\n(.*?)\n?```\s*\Z", re.DOTALL)


def strip_fences(raw: str) -> str:
    m = _FENCE.match(raw)
    return m.group(1) if m else raw


def parse_response(
    raw: str | bytes,
    enabled: frozenset[str],
    group_id: str = "g-0",
    created_at: int = 0,
) -> SuggestionGroup:
    """Parse a JSON suggestion array into a group of 1..3 suggestions.

    Fences are stripped first. Items whose tag is unknown or disabled are
    dropped with a warning; an item missing its tag or description is
    schema-invalid. Failure taxonomy: unparseable input -> ParseFailure;
    every item schema-invalid -> SchemaViolation; parseable but nothing
    survives the drops -> EmptyGroup.
    """
    if isinstance(raw, bytes):
        text = raw.decode("utf-8", errors="replace")
    elif isinstance(raw, str):
        text = raw
    else:
        raise ParseFailure(f"raw must be text, got {type(raw).__name__}")

    try:
        payload = json.loads(strip_fences(text))
    except (json.JSONDecodeError, RecursionError, ValueError) as exc:
        raise ParseFailure(f"not valid JSON: {exc}") from None

    if not isinstance(payload, list):
        raise ParseFailure("payload must be a JSON array")
    if not all(isinstance(item, dict) for item in payload):
        raise ParseFailure("payload must be an array of objects")
    if not payload:
        raise EmptyGroup("response contained no suggestions")

    schema_valid: list[dict] = []
    for item in payload:
        tag = item.get("tag")
        description = item.get("description")
        if isinstance(tag, str) and isinstance(description, str) and description:
            schema_valid.append(item)
    if not schema_valid:
        raise SchemaViolation("every item is missing a tag or a description")

    suggestions: list[Suggestion] = []
    for item in schema_valid:
        try:
            tag = resolve_type(item["tag"])
        except UnknownType:
            log.warning("dropping suggestion with unknown tag %r", item["tag"])
            continue
        if tag not in enabled:
            log.warning("dropping suggestion with disabled tag %r", tag)
            continue
        code = item.get("code")
        explanation = item.get("explanation")
        suggestions.append(
            Suggestion(
                id=f"{group_id}.{len(suggestions) + 1}",
                tag=tag,
                description=item["description"],
                code=code if isinstance(code, str) else "",
                explanation=explanation if isinstance(explanation, str) else "",
                created_at=created_at,
            )
        )
        if len(suggestions) == MAX_GROUP_SIZE:
            break

    if not suggestions:
        raise EmptyGroup("no suggestion with an enabled tag survived")
    return SuggestionGroup(
        id=group_id, suggestions=tuple(suggestions), created_at=created_at
    )


def serialize_group(group: SuggestionGroup) -> str:
    """Emit the exact JSON array shape parse_response accepts.

    parse_response(serialize_group(g), all-types) reproduces g field-wise,
    ignoring ids, states, and timestamps.
    """
    items = [
        {
            "tag": s.tag,
            "description": s.description,
            "code": s.code,
            "explanation": s.explanation,
        }
        for s in group.suggestions
    ]
    return json.dumps(items, indent=2, ensure_ascii=False)

"""Suggestion taxonomy and the suggestion/group data model."""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import UnknownType

# Canonical order is load-bearing: prompt sections and mock output are built
# by iterating this tuple, so reordering it changes byte-level output.
CANONICAL_TYPES: tuple[str, ...] = (
    "improvement",
    "explanation",
    "brainstorm",
    "test",
    "bug-fix",
    "syntax-hint",
)

DISPLAY_LABELS: dict[str, str] = {
    "improvement": "code improvements",
    "explanation": "code explanations",
    "brainstorm": "brainstorming ideas",
    "test": "additional testing",
    "bug-fix": "bug fixes",
    "syntax-hint": "syntax hints",
}

# Normalized spelling -> canonical type. Keys are matched after lowercasing
# and collapsing -, _ and runs of whitespace to single spaces, so "Bug-Fix",
# "bug_fix" and "bug fixes" all land on "bug-fix".
_ALIASES: dict[str, str] = {
    "improvement": "improvement",
    "improvements": "improvement",
    "efficiency": "improvement",
    "code improvement": "improvement",
    "code improvements": "improvement",
    "explanation": "explanation",
    "explanations": "explanation",
    "code explanation": "explanation",
    "code explanations": "explanation",
    "brainstorm": "brainstorm",
    "brainstorming": "brainstorm",
    "ideas": "brainstorm",
    "brainstorming ideas": "brainstorm",
    "test": "test",
    "tests": "test",
    "testing": "test",
    "additional testing": "test",
    "bug fix": "bug-fix",
    "bugfix": "bug-fix",
    "bug fixes": "bug-fix",
    "debugging": "bug-fix",
    "syntax": "syntax-hint",
    "syntax hint": "syntax-hint",
    "syntax hints": "syntax-hint",
}

MAX_DISPLAY_DESCRIPTION = 200


def resolve_type(tag: str) -> str:
    """Map a model- or user-supplied tag to its canonical type.

    Raises UnknownType for anything outside the alias table; callers decide
    whether that is fatal (config) or droppable (one item of a response).
    """
    if not isinstance(tag, str):
        raise UnknownType(f"tag must be a string, got {type(tag).__name__}")
    normalized = " ".join(tag.lower().replace("-", " ").replace("_", " ").split())
    try:
        return _ALIASES[normalized]
    except KeyError:
        raise UnknownType(f"unknown suggestion type: {tag!r}") from None


def display_label(canonical: str) -> str:
    try:
        return DISPLAY_LABELS[canonical]
    except KeyError:
        raise UnknownType(f"not a canonical suggestion type: {canonical!r}") from None


@dataclass(frozen=True)
class Suggestion:
    id: str
    tag: str  # canonical type
    description: str
    code: str = ""
    explanation: str = ""
    state: str = "temporary"  # temporary | accepted | dismissed
    created_at: int = 0

    @property
    def display_description(self) -> str:
        """Description capped for card rendering; the stored text is untouched."""
        if len(self.description) <= MAX_DISPLAY_DESCRIPTION:
            return self.description
        return self.description[: MAX_DISPLAY_DESCRIPTION - 1] + "…"

    def resolved(self, state: str) -> "Suggestion":
        return replace(self, state=state)


@dataclass(frozen=True)
class SuggestionGroup:
    id: str
    suggestions: tuple[Suggestion, ...]
    created_at: int = 0
    retained: bool = False  # an accepted member pins the group across refreshes

    def get(self, suggestion_id: str) -> Suggestion | None:
        for s in self.suggestions:
            if s.id == suggestion_id:
                return s
        return None

    def with_suggestion(self, updated: Suggestion) -> "SuggestionGroup":
        return replace(
            self,
            suggestions=tuple(updated if s.id == updated.id else s for s in self.suggestions),
        )

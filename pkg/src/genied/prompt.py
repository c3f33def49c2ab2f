"""Prompt bundle assembly.

A prompt is an ordered list of named sections plus the model it is bound
for. The section order below is the wire contract; builders may omit
optional sections but never reorder them. The code-context section is the
raw window text with a cursor sentinel spliced in, exactly
``before + CURSOR_SENTINEL + after``, no added framing, so the provider
layer can render it however its API needs.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from .config import PromptSettings
from .errors import EmptyTypeSet, TaskTooLong
from .suggestions import CANONICAL_TYPES, display_label
from .workspace import CodeContext

if TYPE_CHECKING:
    from .session import ChatMessage

CURSOR_SENTINEL = "<|cursor|>"
MAX_TASK_CHARS = 8000

SECTION_ORDER: tuple[str, ...] = (
    "system-preamble",
    "format-instructions",
    "one-shot-example",
    "enabled-types",
    "task-description",
    "chat-history",
    "code-context",
)

_ASSET_FILES = {
    "system-preamble": "system_preamble.txt",
    "format-instructions": "format_instructions.txt",
    "one-shot-example": "one_shot_example.txt",
}


@dataclass(frozen=True)
class TaskDescription:
    """User-supplied goal text, stored verbatim.

    Over-limit text is rejected outright; silent truncation would let the
    prompt drift from what the user believes the assistant can see.
    """

    text: str
    source: str = "user"  # user | imported-ticket

    def __post_init__(self) -> None:
        if len(self.text) > MAX_TASK_CHARS:
            raise TaskTooLong(
                f"task description is {len(self.text)} chars; limit is {MAX_TASK_CHARS}"
            )
        if self.source not in ("user", "imported-ticket"):
            raise ValueError(f"bad task source: {self.source!r}")


@dataclass(frozen=True)
class PromptSection:
    name: str
    text: str


@dataclass(frozen=True)
class PromptBundle:
    sections: tuple[PromptSection, ...]
    model: str

    def __post_init__(self) -> None:
        names = [s.name for s in self.sections]
        it = iter(SECTION_ORDER)
        for name in names:
            # Subsequence check: each name must appear, in declared order.
            for candidate in it:
                if candidate == name:
                    break
            else:
                raise ValueError(
                    f"sections out of order or unknown: {names} vs {SECTION_ORDER}"
                )
        for s in self.sections:
            if not s.text:
                raise ValueError(f"section {s.name!r} is empty")

    def section(self, name: str) -> PromptSection | None:
        for s in self.sections:
            if s.name == name:
                return s
        return None

    def content_digest(self) -> str:
        """Stable hash of model plus section names/texts; mock output keys off this."""
        h = hashlib.sha256()
        h.update(self.model.encode("utf-8"))
        h.update(b"\x00")
        for s in self.sections:
            h.update(s.name.encode("utf-8"))
            h.update(b"\x00")
            h.update(s.text.encode("utf-8"))
            h.update(b"\x00")
        return h.hexdigest()

    @property
    def char_count(self) -> int:
        return sum(len(s.text) for s in self.sections)


def load_asset(name: str, settings: PromptSettings | None = None) -> str:
    """Read a packaged prompt asset, or the same filename from assets_dir."""
    filename = _ASSET_FILES[name]
    if settings is not None and settings.assets_dir is not None:
        return Path(settings.assets_dir, filename).read_text(encoding="utf-8")
    return (
        resources.files("genied").joinpath("prompt_assets", filename).read_text("utf-8")
    )


def render_enabled_types(enabled: frozenset[str]) -> str:
    """Bullet list of enabled categories, in canonical order for stable output."""
    if not enabled:
        raise EmptyTypeSet("at least one suggestion type must be enabled")
    lines = ["Enabled suggestion categories:"]
    for t in CANONICAL_TYPES:
        if t in enabled:
            lines.append(f"- {display_label(t)}")
    return "\n".join(lines)


def parse_enabled_types(section_text: str) -> tuple[str, ...]:
    """Inverse of render_enabled_types; the mock provider reads its menu here."""
    labels = [ln[2:] for ln in section_text.splitlines() if ln.startswith("- ")]
    reverse = {display_label(t): t for t in CANONICAL_TYPES}
    return tuple(reverse[label] for label in labels if label in reverse)


def render_chat_history(history: Sequence["ChatMessage"], limit: int) -> str:
    """Newest-last transcript excerpt, one role-prefixed line per message."""
    recent = list(history)[-limit:] if limit > 0 else []
    return "\n".join(f"{m.role}: {m.body}" for m in recent)


def build_suggestion_prompt(
    context: CodeContext,
    enabled: frozenset[str],
    settings: PromptSettings,
    model: str,
    task: "TaskDescription | None" = None,
    history: Sequence["ChatMessage"] = (),
) -> PromptBundle:
    """Assemble the proactive-request prompt for one fire.

    Pure given its inputs: asset bytes, the enabled set, task text, the
    last ``history_messages`` chat messages, and the code window fully
    determine the output.
    """
    sections = [
        PromptSection("system-preamble", load_asset("system-preamble", settings)),
        PromptSection("format-instructions", load_asset("format-instructions", settings)),
        PromptSection("one-shot-example", load_asset("one-shot-example", settings)),
        PromptSection("enabled-types", render_enabled_types(enabled)),
    ]
    if task is not None and task.text:
        sections.append(PromptSection("task-description", task.text))
    if history:
        rendered = render_chat_history(history, settings.history_messages)
        if rendered:
            sections.append(PromptSection("chat-history", rendered))
    sections.append(
        PromptSection("code-context", context.before + CURSOR_SENTINEL + context.after)
    )
    return PromptBundle(sections=tuple(sections), model=model)


def build_chat_prompt(
    history: Sequence["ChatMessage"], settings: PromptSettings, model: str
) -> PromptBundle:
    """Prompt for the plain chat path: just the conversation, no format demands."""
    rendered = render_chat_history(history, settings.history_messages)
    if not rendered:
        raise ValueError("chat prompt needs at least one message")
    return PromptBundle(
        sections=(PromptSection("chat-history", rendered),), model=model
    )

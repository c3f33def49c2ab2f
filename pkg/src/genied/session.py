"""Chat history and the suggestion-group lifecycle.

State is an immutable value; every operation returns a fresh SessionState.
The rules that matter:

* ``messages`` is append-only. Nothing ever removes or reorders it.
* At most one current (temporary) group exists. Publishing replaces it;
  a replaced group survives, anchored at its original chat position, iff
  one of its suggestions was accepted.
* Accepting a suggestion appends exactly one assistant message carrying the
  full suggestion, so accepted suggestions and accepted-suggestion messages
  stay in one-to-one correspondence.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from .errors import AlreadyResolved, EmptyTypeSet, NoCurrentGroup, UnknownSuggestion
from .suggestions import CANONICAL_TYPES, Suggestion, SuggestionGroup, resolve_type

if TYPE_CHECKING:
    from .prompt import TaskDescription


@dataclass(frozen=True)
class ChatMessage:
    role: str  # user | assistant
    body: str
    origin: str = "typed"  # typed | accepted-suggestion
    at: int = 0

    def __post_init__(self) -> None:
        if self.role not in ("user", "assistant"):
            raise ValueError(f"bad role: {self.role!r}")
        if self.origin not in ("typed", "accepted-suggestion"):
            raise ValueError(f"bad origin: {self.origin!r}")
        if self.origin == "accepted-suggestion" and self.role != "assistant":
            raise ValueError("accepted-suggestion messages must come from the assistant")


@dataclass(frozen=True)
class SessionConfig:
    task: "TaskDescription | None" = None
    enabled: frozenset[str] = frozenset(CANONICAL_TYPES)
    model: str = "gpt-4o"


@dataclass(frozen=True)
class AnchoredGroup:
    group: SuggestionGroup
    anchor: int  # index into messages where the group was first published


@dataclass(frozen=True)
class SessionState:
    messages: tuple[ChatMessage, ...] = ()
    current_group: SuggestionGroup | None = None
    current_anchor: int = 0
    retained_groups: tuple[AnchoredGroup, ...] = ()
    config: SessionConfig = field(default_factory=SessionConfig)


def append_message(state: SessionState, message: ChatMessage) -> SessionState:
    return replace(state, messages=state.messages + (message,))


def publish_group(state: SessionState, group: SuggestionGroup) -> SessionState:
    """Make ``group`` the current group, preserving a retained predecessor."""
    retained = state.retained_groups
    if state.current_group is not None and state.current_group.retained:
        retained = retained + (AnchoredGroup(state.current_group, state.current_anchor),)
    return replace(
        state,
        current_group=group,
        current_anchor=len(state.messages),
        retained_groups=retained,
    )


def _locate(state: SessionState, suggestion_id: str) -> tuple[str, int, SuggestionGroup, Suggestion]:
    """Find a suggestion in the current group or any retained group.

    Returns (where, index, group, suggestion); where is "current" or
    "retained" and index is the retained_groups position (or -1).
    """
    if state.current_group is not None:
        s = state.current_group.get(suggestion_id)
        if s is not None:
            return "current", -1, state.current_group, s
    for i, ag in enumerate(state.retained_groups):
        s = ag.group.get(suggestion_id)
        if s is not None:
            return "retained", i, ag.group, s
    raise UnknownSuggestion(f"no such suggestion: {suggestion_id}")


def accept_suggestion(state: SessionState, suggestion_id: str, at: int = 0) -> SessionState:
    """Accept a temporary suggestion into chat.

    The suggestion flips to accepted, its group becomes retained, and one
    assistant message with the full suggestion text lands at the bottom of
    the history. The group's anchor never moves.
    """
    where, idx, group, suggestion = _locate(state, suggestion_id)
    if suggestion.state != "temporary":
        raise AlreadyResolved(f"suggestion {suggestion_id} is already {suggestion.state}")
    updated = group.with_suggestion(suggestion.resolved("accepted"))
    updated = replace(updated, retained=True)
    if where == "current":
        state = replace(state, current_group=updated)
    else:
        rg = list(state.retained_groups)
        rg[idx] = replace(rg[idx], group=updated)
        state = replace(state, retained_groups=tuple(rg))
    message = ChatMessage(
        role="assistant",
        body=render_accepted_body(suggestion),
        origin="accepted-suggestion",
        at=at,
    )
    return append_message(state, message)


def render_accepted_body(s: Suggestion) -> str:
    """Description, blank line, fenced code, blank line, explanation.

    Empty code or explanation drops that block and its separator.
    """
    parts = [s.description]
    if s.code:
        parts.append(f"```\n{s.code}\n```")
    if s.explanation:
        parts.append(s.explanation)
    return "\n\n".join(parts)


def dismiss_group(state: SessionState) -> SessionState:
    """Clear the current group; its remaining temporary suggestions become dismissed.

    A group holding an accepted suggestion is not destroyed: it moves to
    retained_groups so accepted suggestions stay addressable.
    """
    group = state.current_group
    if group is None:
        raise NoCurrentGroup("no current suggestion group to dismiss")
    closed = group
    for s in group.suggestions:
        if s.state == "temporary":
            closed = closed.with_suggestion(s.resolved("dismissed"))
    retained = state.retained_groups
    if closed.retained:
        retained = retained + (AnchoredGroup(closed, state.current_anchor),)
    return replace(state, current_group=None, retained_groups=retained)


def update_config(
    state: SessionState,
    task: "TaskDescription | None" = None,
    enabled: frozenset[str] | None = None,
    model: str | None = None,
) -> SessionState:
    """Replace the provided config fields; omitted ones stay as they are."""
    cfg = state.config
    if task is not None:
        cfg = replace(cfg, task=task)
    if enabled is not None:
        canonical = frozenset(resolve_type(t) for t in enabled)
        if not canonical:
            raise EmptyTypeSet("at least one suggestion type must stay enabled")
        cfg = replace(cfg, enabled=canonical)
    if model is not None:
        cfg = replace(cfg, model=model)
    return replace(state, config=cfg)

"""Debounce and suppression state machine deciding when to fire a request.

Pure transition functions over explicit millisecond timestamps. The machine
never reads a clock: the host stamps every event on arrival and drives
``tick`` with the current time, which makes live operation and trace replay
run the exact same code path.

Rules encoded here:

* A code change arms (or re-arms) a deadline ``at + t_code_quiet_ms`` and
  cancels any request already in flight, since its context is now stale.
* Chat activity and suggestion interaction suppress proactive firing until
  ``at + t_chat_quiet_ms`` and disarm any pending deadline. Suppression only
  ever extends; it never shrinks.
* A tick fires only when a deadline is armed, the deadline and the
  suppression window have both passed, and nothing is in flight.
* A manual trigger bypasses deadline and suppression but still refuses to
  stack a second in-flight request.
* ``in_flight`` is set by firing and cleared only by a terminal completion
  or failure event, so at most one request is outstanding at any time.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .config import SchedulerSettings
from .errors import StaleEvent


class EventKind(enum.Enum):
    CODE_CHANGE = "code-change"
    CHAT_TYPING = "chat-typing"
    CHAT_MESSAGE_SENT = "chat-message-sent"
    SUGGESTION_INTERACTION = "suggestion-interaction"
    SUGGESTION_ACCEPTED = "suggestion-accepted"
    MANUAL_TRIGGER = "manual-trigger"
    REQUEST_COMPLETED = "request-completed"
    REQUEST_FAILED = "request-failed"


class Action(enum.Enum):
    FIRE_REQUEST = "fire-request"
    CANCEL_IN_FLIGHT = "cancel-in-flight"


@dataclass(frozen=True)
class SchedulerEvent:
    kind: EventKind
    at: int  # milliseconds on the host's monotonic clock


@dataclass(frozen=True)
class SchedulerState:
    arm_deadline: int | None = None
    suppress_until: int = 0
    in_flight: bool = False
    retain_current_group: bool = False
    last_event_at: int = 0


_SUPPRESSING = frozenset(
    {
        EventKind.CHAT_TYPING,
        EventKind.CHAT_MESSAGE_SENT,
        EventKind.SUGGESTION_INTERACTION,
        EventKind.SUGGESTION_ACCEPTED,
    }
)

_TERMINAL = frozenset({EventKind.REQUEST_COMPLETED, EventKind.REQUEST_FAILED})


def on_event(
    state: SchedulerState, cfg: SchedulerSettings, event: SchedulerEvent
) -> tuple[SchedulerState, tuple[Action, ...]]:
    """Apply one event; returns the new state and any actions to perform."""
    if event.at < state.last_event_at:
        raise StaleEvent(
            f"event at {event.at}ms precedes last event at {state.last_event_at}ms"
        )
    state = replace(state, last_event_at=event.at)
    actions: tuple[Action, ...] = ()

    if event.kind is EventKind.CODE_CHANGE:
        # Re-arm from this keystroke. An in-flight request was built from
        # older text, so ask the host to cancel it; in_flight stays set
        # until the cancelled request reports back.
        if state.in_flight:
            actions = (Action.CANCEL_IN_FLIGHT,)
        state = replace(state, arm_deadline=event.at + cfg.t_code_quiet_ms)

    elif event.kind in _SUPPRESSING:
        state = replace(
            state,
            arm_deadline=None,
            suppress_until=max(state.suppress_until, event.at + cfg.t_chat_quiet_ms),
        )
        if event.kind is EventKind.SUGGESTION_ACCEPTED:
            state = replace(state, retain_current_group=True)

    elif event.kind is EventKind.MANUAL_TRIGGER:
        if not state.in_flight:
            state = replace(state, arm_deadline=None, in_flight=True)
            actions = (Action.FIRE_REQUEST,)

    elif event.kind in _TERMINAL:
        state = replace(state, in_flight=False)
        if event.kind is EventKind.REQUEST_COMPLETED:
            # The fresh group replaced whatever the retain flag protected.
            state = replace(state, retain_current_group=False)

    return state, actions


def tick(
    state: SchedulerState, cfg: SchedulerSettings, now: int
) -> tuple[SchedulerState, tuple[Action, ...]]:
    """Advance time to ``now`` and fire if the quiet conditions hold.

    A suppressed or premature tick is a no-op that keeps the deadline armed;
    the pending request fires at the first tick past both gates.
    """
    if now < state.last_event_at:
        return state, ()
    if (
        state.arm_deadline is not None
        and now >= state.arm_deadline
        and now >= state.suppress_until
        and not state.in_flight
    ):
        state = replace(state, arm_deadline=None, in_flight=True, last_event_at=now)
        return state, (Action.FIRE_REQUEST,)
    return state, ()


def next_fire_at(state: SchedulerState) -> int | None:
    """Earliest tick time at which ``tick`` would fire, or None if it cannot."""
    if state.arm_deadline is None or state.in_flight:
        return None
    return max(state.arm_deadline, state.suppress_until)

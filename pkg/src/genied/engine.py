"""The session engine: one object owning all state for one client session.

Everything here runs on a single logical owner (the RPC owner loop live,
the replay loop offline). The engine never reads a clock; every entry point
takes an explicit millisecond timestamp, clamped so engine-observed time is
monotone even if caller stamps race slightly.

Request execution is delegated to a RequestRunner so the same engine code
serves both worlds: ThreadedRunner dispatches to a live/mock provider on a
worker pool and posts outcomes back to the owner, VirtualRunner computes
mock outcomes eagerly and hands them back at deterministic virtual times.

One proactive cycle = one scheduler fire. A cycle ends published, cancelled,
or failed, so proactive = published + cancelled + failed always holds. A
parse failure inside a cycle triggers exactly one regeneration attempt; the
extra provider call is visible in the cost ledger but is the same cycle.
"""
from __future__ import annotations

import heapq
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Protocol

from . import scheduler as sched
from . import session as sess
from .config import GeniedConfig
from .cost import CostLedger, PricingTable
from .errors import Cancelled, EmptyGroup, ParseFailure, SchemaViolation
from .parser import parse_response
from .prompt import TaskDescription, build_chat_prompt, build_suggestion_prompt
from .provider import CancellationToken, ProviderRequest, ProviderResponse
from .session import ChatMessage, SessionState
from .suggestions import Suggestion, SuggestionGroup
from .trace import TraceRecorder
from .workspace import DocumentStore, extract_context

log = logging.getLogger(__name__)

Notify = Callable[[str, dict], None]


@dataclass
class Ticket:
    """One provider call: a proactive attempt or a chat turn."""

    id: int
    kind: str  # proactive | chat
    request: ProviderRequest
    enabled: frozenset[str]
    fired_at: int
    attempt: int = 1


class RequestRunner(Protocol):
    def start(self, ticket: Ticket) -> None: ...

    def cancel(self, ticket: Ticket, at: int) -> None: ...


class ThreadedRunner:
    """Runs provider calls on a small pool; outcomes are posted, not returned.

    ``post(ticket, status, payload)`` must hand the outcome back to the
    session owner (the RPC loop pushes onto its own queue). Cancellation
    needs no work here: the ticket's token is already set and the provider
    unwinds on its own, posting a Cancelled error.
    """

    def __init__(self, provider, post: Callable[[Ticket, str, object], None]):
        self._provider = provider
        self._post = post
        self._pool = ThreadPoolExecutor(max_workers=2)

    def start(self, ticket: Ticket) -> None:
        def run() -> None:
            try:
                response = self._provider.complete(ticket.request)
            except Exception as exc:
                self._post(ticket, "error", exc)
            else:
                self._post(ticket, "ok", response)

        self._pool.submit(run)

    def cancel(self, ticket: Ticket, at: int) -> None:
        pass

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False, cancel_futures=True)


class VirtualRunner:
    """Deterministic runner for replay: no threads, no wall clock.

    The provider (a mock) is invoked synchronously at fire time; the outcome
    is queued for delivery at fire time + latency on the virtual clock.
    Cancelling replaces the queued outcome with Cancelled, delivered at the
    cancellation time.
    """

    def __init__(self, provider, latency_ms: int = 0):
        self._provider = provider
        self._latency = latency_ms
        self._seq = 0
        self._pending: list[tuple[int, int, Ticket, str, object]] = []

    def start(self, ticket: Ticket) -> None:
        try:
            payload: object = self._provider.complete(ticket.request)
            status = "ok"
        except Exception as exc:
            payload = exc
            status = "error"
        self._seq += 1
        heapq.heappush(
            self._pending,
            (ticket.fired_at + self._latency, self._seq, ticket, status, payload),
        )

    def cancel(self, ticket: Ticket, at: int) -> None:
        kept = [entry for entry in self._pending if entry[2].id != ticket.id]
        if len(kept) != len(self._pending):
            self._seq += 1
            kept.append(
                (at, self._seq, ticket, "error", Cancelled("cancelled during replay"))
            )
            self._pending = kept
            heapq.heapify(self._pending)

    def next_delivery_at(self) -> int | None:
        return self._pending[0][0] if self._pending else None

    def pop_due(self, now: int) -> list[tuple[Ticket, str, object, int]]:
        due = []
        while self._pending and self._pending[0][0] <= now:
            at, _, ticket, status, payload = heapq.heappop(self._pending)
            due.append((ticket, status, payload, at))
        return due


def suggestion_to_wire(s: Suggestion) -> dict:
    return {
        "id": s.id,
        "tag": s.tag,
        "description": s.description,
        "displayDescription": s.display_description,
        "code": s.code,
        "explanation": s.explanation,
        "state": s.state,
        "createdAt": s.created_at,
    }


def group_to_wire(g: SuggestionGroup) -> dict:
    return {
        "id": g.id,
        "createdAt": g.created_at,
        "retained": g.retained,
        "suggestions": [suggestion_to_wire(s) for s in g.suggestions],
    }


def message_to_wire(m: ChatMessage) -> dict:
    return {"role": m.role, "body": m.body, "origin": m.origin, "at": m.at}


class SessionEngine:
    PROTOCOL_VERSION = 1

    def __init__(
        self,
        config: GeniedConfig,
        runner: RequestRunner,
        notify: Notify,
        pricing: PricingTable | None = None,
        recorder: TraceRecorder | None = None,
    ):
        self.config = config
        self._runner = runner
        self._notify = notify
        self._recorder = recorder
        self.store = DocumentStore()
        self.sched_state = sched.SchedulerState()
        self.session = SessionState(
            config=sess.SessionConfig(model=config.provider.model)
        )
        self.ledger = CostLedger(pricing or PricingTable.load(config.pricing.table_path))
        self.counts = {
            "proactive": 0,
            "published": 0,
            "cancelled": 0,
            "failed": 0,
            "chat": 0,
        }
        self.timeline: list[dict] = []
        self._inflight: Ticket | None = None
        self._ticket_seq = 0
        self._group_seq = 0
        self._now = 0
        self.shutdown_requested = False

    # -- time ------------------------------------------------------------

    def _clamp(self, at: int) -> int:
        # Owner-observed time is monotone even if caller stamps race.
        self._now = max(self._now, at)
        return self._now

    def next_wake(self) -> int | None:
        return sched.next_fire_at(self.sched_state)

    # -- client requests ---------------------------------------------------

    def initialize(self, params: dict, at: int) -> dict:
        at = self._clamp(at)
        self._record(at, "initialize", {})
        return {
            "protocolVersion": self.PROTOCOL_VERSION,
            "sessionId": "session-1",
            "capabilities": {
                "suggestionTypes": sorted(self.session.config.enabled),
                "manualTrigger": True,
                "replayInject": self.config.rpc.allow_inject,
            },
        }

    def did_open(self, uri: str, text: str, version: int, at: int) -> None:
        at = self._clamp(at)
        self._record(at, "document/didOpen", {"uri": uri, "text": text, "version": version})
        self.store.open(uri, text, version)

    def did_change(self, uri: str, start: int, end: int, text: str, at: int) -> dict:
        at = self._clamp(at)
        self._record(
            at, "document/didChange", {"uri": uri, "start": start, "end": end, "text": text}
        )
        doc = self.store.change(uri, start, end, text)
        self._apply_scheduler(sched.EventKind.CODE_CHANGE, at)
        return {"uri": doc.uri, "version": doc.version}

    def did_move(self, uri: str, offset: int, at: int) -> None:
        # Cursor motion refreshes the context source but never the scheduler.
        at = self._clamp(at)
        self._record(at, "cursor/didMove", {"uri": uri, "offset": offset})
        self.store.move_cursor(uri, offset)

    def chat_typing(self, at: int) -> None:
        at = self._clamp(at)
        self._record(at, "chat/typing", {})
        self._apply_scheduler(sched.EventKind.CHAT_TYPING, at)

    def chat_send_message(self, body: str, at: int) -> dict:
        at = self._clamp(at)
        self._record(at, "chat/sendMessage", {"body": body})
        message = ChatMessage(role="user", body=body, origin="typed", at=at)
        self.session = sess.append_message(self.session, message)
        self._notify("chat/messageAppended", {"message": message_to_wire(message)})
        self._apply_scheduler(sched.EventKind.CHAT_MESSAGE_SENT, at)
        self._start_chat_request(at)
        return {"queued": True}

    def accept(self, suggestion_id: str, at: int) -> dict:
        at = self._clamp(at)
        self._record(at, "suggestions/accept", {"suggestionId": suggestion_id})
        self.session = sess.accept_suggestion(self.session, suggestion_id, at)
        message = self.session.messages[-1]
        self._notify("chat/messageAppended", {"message": message_to_wire(message)})
        self._apply_scheduler(sched.EventKind.SUGGESTION_ACCEPTED, at)
        return {"suggestionId": suggestion_id, "state": "accepted",
                "message": message_to_wire(message)}

    def dismiss(self, at: int) -> dict:
        at = self._clamp(at)
        self._record(at, "suggestions/dismiss", {})
        group = self.session.current_group
        self.session = sess.dismiss_group(self.session)
        assert group is not None  # dismiss_group raised otherwise
        self._notify("suggestions/cleared", {"groupId": group.id})
        self._apply_scheduler(sched.EventKind.SUGGESTION_INTERACTION, at)
        return {"groupId": group.id}

    def trigger(self, at: int) -> dict:
        at = self._clamp(at)
        self._record(at, "suggestions/trigger", {})
        fired = self._apply_scheduler(sched.EventKind.MANUAL_TRIGGER, at)
        return {"fired": fired}

    def config_update(
        self,
        at: int,
        task: str | None = None,
        task_source: str = "user",
        enabled: list[str] | None = None,
        model: str | None = None,
    ) -> dict:
        at = self._clamp(at)
        payload: dict = {}
        if task is not None:
            payload["task"] = task
            payload["taskSource"] = task_source
        if enabled is not None:
            payload["enabledTypes"] = list(enabled)
        if model is not None:
            payload["model"] = model
        self._record(at, "config/update", payload)
        task_value = TaskDescription(text=task, source=task_source) if task is not None else None
        self.session = sess.update_config(
            self.session,
            task=task_value,
            enabled=frozenset(enabled) if enabled is not None else None,
            model=model,
        )
        cfg = self.session.config
        return {
            "task": cfg.task.text if cfg.task else None,
            "enabledTypes": sorted(cfg.enabled),
            "model": cfg.model,
        }

    def shutdown(self, at: int) -> None:
        self._clamp(at)
        self.shutdown_requested = True
        return None

    def session_state_wire(self) -> dict:
        s = self.session
        return {
            "messages": [message_to_wire(m) for m in s.messages],
            "currentGroup": group_to_wire(s.current_group) if s.current_group else None,
            "currentAnchor": s.current_anchor,
            "retainedGroups": [
                {"group": group_to_wire(ag.group), "anchor": ag.anchor}
                for ag in s.retained_groups
            ],
            "config": {
                "task": s.config.task.text if s.config.task else None,
                "enabledTypes": sorted(s.config.enabled),
                "model": s.config.model,
            },
            "counts": dict(self.counts),
            "cost": self.ledger.totals(),
        }

    # -- scheduler plumbing ----------------------------------------------

    def _apply_scheduler(self, kind: sched.EventKind, at: int) -> bool:
        """Feed one event through the machine; returns True if it fired."""
        self.sched_state, actions = sched.on_event(
            self.sched_state, self.config.scheduler, sched.SchedulerEvent(kind, at)
        )
        fired = False
        for action in actions:
            if action is sched.Action.CANCEL_IN_FLIGHT:
                self._cancel_inflight(at)
            elif action is sched.Action.FIRE_REQUEST:
                self._fire(at)
                fired = True
        return fired

    def tick(self, now: int) -> bool:
        now = self._clamp(now)
        self.sched_state, actions = sched.tick(self.sched_state, self.config.scheduler, now)
        if sched.Action.FIRE_REQUEST in actions:
            self._fire(now)
            return True
        return False

    def _cancel_inflight(self, at: int) -> None:
        if self._inflight is not None:
            self._inflight.request.cancel.cancel()
            self._runner.cancel(self._inflight, at)

    # -- proactive request cycle -------------------------------------------

    def _fire(self, at: int) -> None:
        self.counts["proactive"] += 1
        snapshot = self.store.snapshot()
        if snapshot is None:
            # Fired with no document to look at; close the cycle as failed.
            log.warning("proactive fire with no open document")
            self.counts["failed"] += 1
            self.timeline.append(
                {"fired_at": at, "completed_at": at, "outcome": "failed", "group_id": None}
            )
            self._apply_scheduler(sched.EventKind.REQUEST_FAILED, at)
            return
        doc, cursor = snapshot
        context = extract_context(doc, cursor, self.config.workspace.context_window_chars)
        cfg = self.session.config
        bundle = build_suggestion_prompt(
            context=context,
            enabled=cfg.enabled,
            settings=self.config.prompt,
            model=cfg.model,
            task=cfg.task,
            history=self.session.messages,
        )
        self._start_ticket("proactive", bundle, cfg.enabled, at, attempt=1)

    def _start_ticket(
        self,
        kind: str,
        bundle,
        enabled: frozenset[str],
        at: int,
        attempt: int,
        chat_turns: tuple[tuple[str, str], ...] | None = None,
    ) -> Ticket:
        self._ticket_seq += 1
        ticket = Ticket(
            id=self._ticket_seq,
            kind=kind,
            request=ProviderRequest(
                bundle=bundle,
                model=bundle.model,
                max_output_tokens=self.config.provider.max_output_tokens,
                cancel=CancellationToken(),
                chat_turns=chat_turns,
            ),
            enabled=enabled,
            fired_at=at,
            attempt=attempt,
        )
        if kind == "proactive":
            self._inflight = ticket
        self._runner.start(ticket)
        return ticket

    def _start_chat_request(self, at: int) -> None:
        cfg = self.session.config
        bundle = build_chat_prompt(self.session.messages, self.config.prompt, cfg.model)
        limit = self.config.prompt.history_messages
        turns = tuple(
            (m.role, m.body) for m in self.session.messages[-limit:]
        )
        self.counts["chat"] += 1
        self._start_ticket("chat", bundle, cfg.enabled, at, attempt=1, chat_turns=turns)

    # -- outcome handling --------------------------------------------------

    def on_outcome(self, ticket: Ticket, status: str, payload: object, at: int) -> None:
        at = self._clamp(at)
        if ticket.kind == "chat":
            self._on_chat_outcome(ticket, status, payload, at)
        else:
            self._on_proactive_outcome(ticket, status, payload, at)

    def _on_chat_outcome(self, ticket: Ticket, status: str, payload: object, at: int) -> None:
        if status != "ok":
            log.warning("chat request failed: %s", payload)
            return
        response: ProviderResponse = payload  # type: ignore[assignment]
        reply = ChatMessage(role="assistant", body=response.raw_text, origin="typed", at=at)
        self.session = sess.append_message(self.session, reply)
        self._notify("chat/messageAppended", {"message": message_to_wire(reply)})
        self._record_cost(ticket, response)

    def _on_proactive_outcome(
        self, ticket: Ticket, status: str, payload: object, at: int
    ) -> None:
        if self._inflight is None or self._inflight.id != ticket.id:
            return  # outcome of an abandoned attempt; its cycle is closed
        if status != "ok":
            outcome = "cancelled" if isinstance(payload, Cancelled) else "failed"
            if outcome == "failed":
                log.warning("proactive request failed: %s", payload)
            self._close_cycle(ticket, outcome, at, group_id=None)
            return

        response: ProviderResponse = payload  # type: ignore[assignment]
        self._record_cost(ticket, response)
        if ticket.request.cancel.is_cancelled():
            # Completed on the wire, but a later code change already
            # invalidated the context; publishing would show stale advice.
            self._close_cycle(ticket, "cancelled", at, group_id=None)
            return
        self._group_seq += 1
        group_id = f"g-{self._group_seq}"
        try:
            group = parse_response(
                response.raw_text, ticket.enabled, group_id=group_id, created_at=at
            )
        except (ParseFailure, SchemaViolation, EmptyGroup) as exc:
            if ticket.attempt == 1:
                # One regeneration with the identical bundle; same cycle.
                log.warning("unparseable response, regenerating once: %s", exc)
                self._start_ticket(
                    "proactive", ticket.request.bundle, ticket.enabled,
                    ticket.fired_at, attempt=2,
                )
                return
            log.warning("regeneration also unparseable, dropping cycle: %s", exc)
            self._close_cycle(ticket, "failed", at, group_id=None)
            return
        self.session = sess.publish_group(self.session, group)
        self._notify("suggestions/published", {"group": group_to_wire(group)})
        self._close_cycle(ticket, "published", at, group_id=group.id)

    def _close_cycle(self, ticket: Ticket, outcome: str, at: int, group_id: str | None) -> None:
        self.counts[outcome] += 1
        self.timeline.append(
            {
                "fired_at": ticket.fired_at,
                "completed_at": at,
                "outcome": outcome,
                "group_id": group_id,
            }
        )
        self._inflight = None
        terminal = (
            sched.EventKind.REQUEST_COMPLETED
            if outcome == "published"
            else sched.EventKind.REQUEST_FAILED
        )
        self._apply_scheduler(terminal, at)

    def _record_cost(self, ticket: Ticket, response: ProviderResponse) -> None:
        self.ledger.record(
            request_id=f"t{ticket.id}",
            model=ticket.request.model,
            input_tokens=response.usage.input_tokens,
            output_tokens=response.usage.output_tokens,
            estimated=response.usage.estimated,
            kind=ticket.kind,
        )
        self._notify("cost/updated", self.ledger.totals())

    def _record(self, at: int, event: str, payload: dict) -> None:
        if self._recorder is not None:
            self._recorder.record(at, event, payload)

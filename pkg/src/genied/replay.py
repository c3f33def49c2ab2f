"""Deterministic trace replay.

The virtual clock is the trace itself: the only times that exist are event
timestamps, mock-completion delivery times, and scheduler fire deadlines.
Between consecutive trace events the loop advances through every pending
delivery and due fire in time order; at one instant the order is fixed as
deliveries, then the trace event, then a fire. After the last event the
loop drains to quiescence, so a trace that ends mid-debounce still sees its
request fire and complete.

Reports are plain dicts rendered with sorted keys, so byte-identical input
and seed give byte-identical output.
"""
from __future__ import annotations

import json
from collections import Counter
from pathlib import Path

from .config import GeniedConfig
from .cost import (
    SUBSCRIPTION_NOTE,
    PricingTable,
    proactivity_multiplier,
    reference_scenarios,
    request_cost,
)
from .engine import SessionEngine, VirtualRunner
from .errors import UnknownModel
from .provider import MockProvider
from .rpc.dispatch import Dispatcher
from .trace import TraceEvent, load_trace


def _advance(engine: SessionEngine, runner: VirtualRunner, to: int | None) -> None:
    """Run deliveries and fires due before ``to`` (None: run to quiescence)."""
    while True:
        candidates = []
        delivery_at = runner.next_delivery_at()
        if delivery_at is not None and (to is None or delivery_at <= to):
            candidates.append((delivery_at, 0))
        fire_at = engine.next_wake()
        if fire_at is not None and (to is None or fire_at < to):
            candidates.append((fire_at, 1))
        if not candidates:
            return
        when, which = min(candidates)
        if which == 0:
            for ticket, status, payload, at in runner.pop_due(when):
                engine.on_outcome(ticket, status, payload, at)
        else:
            engine.tick(when)


def run_trace(
    events: list[TraceEvent], config: GeniedConfig, seed: int | None = None
) -> tuple[SessionEngine, dict]:
    """Drive a fresh engine through the events; returns (engine, notification counts)."""
    mock_seed = config.provider.mock_seed if seed is None else seed
    provider = MockProvider(seed=mock_seed)
    runner = VirtualRunner(provider, latency_ms=config.provider.mock_latency_ms)
    notification_counts: Counter = Counter()

    def notify(method: str, params: dict) -> None:
        notification_counts[method] += 1

    engine = SessionEngine(config, runner, notify)
    dispatcher = Dispatcher(engine, config)
    for ev in events:
        _advance(engine, runner, to=ev.t_ms)
        if ev.event == "end":
            engine.tick(ev.t_ms)
            continue
        dispatcher.handle(ev.event, ev.payload, at=ev.t_ms)
    _advance(engine, runner, to=None)
    return engine, dict(notification_counts)


def build_report(
    trace_path: str,
    events: list[TraceEvent],
    engine: SessionEngine,
    config: GeniedConfig,
    seed: int,
) -> dict:
    totals = engine.ledger.totals()
    table = engine.ledger.table
    event_counts = Counter(ev.event for ev in events)
    measured = _measured_block(events, engine, config, table)
    return {
        "trace": {
            "path": str(trace_path),
            "events": len(events),
            "event_counts": dict(sorted(event_counts.items())),
        },
        "config": {
            "t_code_quiet_ms": config.scheduler.t_code_quiet_ms,
            "t_chat_quiet_ms": config.scheduler.t_chat_quiet_ms,
            "context_window_chars": config.workspace.context_window_chars,
            "history_messages": config.prompt.history_messages,
            "model": config.provider.model,
            "mock_seed": seed,
        },
        "requests": dict(engine.counts),
        "timeline": list(engine.timeline),
        "tokens": {
            "input": totals["input_tokens"],
            "output": totals["output_tokens"],
        },
        "cost": {
            "micro": totals["cost_micro"],
            "usd": totals["cost_usd"],
            "llm_calls": totals["requests"],
            "unpriced_calls": totals["unpriced_requests"],
            "calls": [
                {
                    "id": e.request_id,
                    "kind": e.kind,
                    "model": e.model,
                    "input_tokens": e.input_tokens,
                    "output_tokens": e.output_tokens,
                    "cost_micro": e.cost_micro,
                    "estimated": e.estimated,
                }
                for e in engine.ledger.entries
            ],
        },
        "measured": measured,
        "scenarios": reference_scenarios(table),
        "notes": [SUBSCRIPTION_NOTE],
    }


def _measured_block(
    events: list[TraceEvent],
    engine: SessionEngine,
    config: GeniedConfig,
    table: PricingTable,
) -> dict:
    """Empirical frequency/cost figures from this run.

    The autocomplete baseline treats every code change as one would-be
    autocomplete request with the same token footprint as the average
    proactive call, priced at the configured autocomplete model. That is
    the equal-context-length assumption made explicit and recomputable.
    Fields that have no defined value on this trace (no code changes, no
    priced proactive calls) are null rather than guessed.
    """
    f_auto = sum(1 for ev in events if ev.event == "document/didChange")
    f_pro = engine.counts["proactive"]
    p = f_pro / f_auto if f_auto else None
    pro_calls = [
        e
        for e in engine.ledger.entries
        if e.kind == "proactive" and e.cost_micro is not None
    ]
    if pro_calls:
        avg_in = sum(e.input_tokens for e in pro_calls) // len(pro_calls)
        avg_out = sum(e.output_tokens for e in pro_calls) // len(pro_calls)
        c_pro = sum(e.cost_micro for e in pro_calls) // len(pro_calls)
    else:
        avg_in = avg_out = c_pro = None
    auto_model = config.pricing.autocomplete_model
    c_auto = None
    if avg_in is not None:
        try:
            c_auto = request_cost(avg_in, avg_out, table.lookup(auto_model))
        except UnknownModel:
            c_auto = None
    r = c_pro / c_auto if (c_pro is not None and c_auto) else None
    multiplier = (
        proactivity_multiplier(r, p)
        if (r is not None and p is not None and 0 <= p <= 1)
        else None
    )
    return {
        "f_auto_code_changes": f_auto,
        "f_pro_cycles": f_pro,
        "p": p,
        "avg_proactive_input_tokens": avg_in,
        "avg_proactive_output_tokens": avg_out,
        "c_pro_micro": c_pro,
        "c_auto_micro": c_auto,
        "autocomplete_model": auto_model,
        "r": r,
        "multiplier": multiplier,
    }


def render_text(report: dict) -> str:
    lines = []
    t = report["trace"]
    lines.append(f"trace: {t['path']} ({t['events']} events)")
    for name, count in t["event_counts"].items():
        lines.append(f"  {name}: {count}")
    c = report["config"]
    lines.append(
        "config: t_code_quiet_ms={t_code_quiet_ms} t_chat_quiet_ms={t_chat_quiet_ms} "
        "window={context_window_chars} history={history_messages} model={model} "
        "seed={mock_seed}".format(**c)
    )
    r = report["requests"]
    lines.append(
        "requests: proactive={proactive} published={published} cancelled={cancelled} "
        "failed={failed} chat={chat}".format(**r)
    )
    lines.append("timeline:")
    for row in report["timeline"]:
        lines.append(
            f"  fired_at={row['fired_at']} completed_at={row['completed_at']} "
            f"outcome={row['outcome']} group={row['group_id']}"
        )
    tok = report["tokens"]
    lines.append(f"tokens: input={tok['input']} output={tok['output']}")
    cost = report["cost"]
    lines.append(
        f"cost: ${cost['usd']} ({cost['micro']} micro) over {cost['llm_calls']} calls"
        + (f", {cost['unpriced_calls']} unpriced" if cost["unpriced_calls"] else "")
    )
    m = report["measured"]
    lines.append(
        "measured: f_auto={f_auto_code_changes} f_pro={f_pro_cycles} p={p} r={r} "
        "multiplier={multiplier}".format(**m)
    )
    lines.append("scenarios:")
    for s in report["scenarios"]:
        lines.append(f"  {s['name']}: r={s['r']} p={s['p']} multiplier={s['multiplier']}")
    for note in report["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def replay(trace_path: str | Path, config: GeniedConfig, seed: int | None = None) -> dict:
    events = load_trace(trace_path)
    engine, _ = run_trace(events, config, seed=seed)
    effective_seed = config.provider.mock_seed if seed is None else seed
    return build_report(str(trace_path), events, engine, config, effective_seed)

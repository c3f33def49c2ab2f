"""Command-line entry points.

genied          the daemon itself, over stdio or WebSocket
genied-replay   deterministic trace replay with a cost report
genied-harness  run the three inspection scaffolds and print suggestions
genied-trace    record a live stdio session as a replayable trace

All diagnostics go to stderr; on the stdio transport, stdout is the
protocol channel and carries nothing else.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace as dc_replace

from .config import GeniedConfig, load_config
from .errors import ConfigError, GeniedError, MalformedTrace
from .harness import run_harness
from .provider import HttpProvider, MockProvider
from .replay import render_json, render_text, replay
from .rpc.server import StdioServer, WebSocketServer
from .trace import TraceRecorder


def _setup_logging() -> None:
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


def _build_provider(config: GeniedConfig, mock: bool):
    if mock:
        return MockProvider(
            seed=config.provider.mock_seed, latency_ms=config.provider.mock_latency_ms
        )
    return HttpProvider(config.provider)


def _open_recorder(config: GeniedConfig) -> TraceRecorder | None:
    if config.session.log_path is None:
        return None
    sink = open(config.session.log_path, "a", encoding="utf-8")
    return TraceRecorder(sink)


def main_daemon(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="genied", description="proactive coding-assistant daemon"
    )
    transport = parser.add_mutually_exclusive_group(required=True)
    transport.add_argument(
        "--stdio", action="store_true", help="serve one session over stdin/stdout"
    )
    transport.add_argument(
        "--ws", type=int, metavar="PORT", help="serve sessions over WebSocket"
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument(
        "--mock", action="store_true", help="use the deterministic mock provider"
    )
    parser.add_argument(
        "--ws-host", default="127.0.0.1", help=argparse.SUPPRESS
    )
    args = parser.parse_args(argv)
    _setup_logging()
    try:
        config = load_config(args.config)
        if args.stdio:
            provider = _build_provider(config, args.mock)
            server = StdioServer(
                config,
                provider,
                sys.stdin.buffer,
                sys.stdout.buffer,
                recorder=_open_recorder(config),
            )
            server.run()
        else:
            provider = _build_provider(config, args.mock)
            WebSocketServer(
                config, lambda: provider, host=args.ws_host, port=args.ws
            ).serve_forever()
    except ConfigError as exc:
        print(f"genied: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0
    return 0


def main_replay(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="genied-replay", description="replay a trace deterministically"
    )
    parser.add_argument("trace", help="JSONL trace file")
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument(
        "--seed", type=int, default=None, help="mock seed (default: config value)"
    )
    parser.add_argument("--report", choices=["json", "text"], default="text")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        report = replay(args.trace, config, seed=args.seed)
    except FileNotFoundError as exc:
        print(f"genied-replay: {exc}", file=sys.stderr)
        return 2
    except MalformedTrace as exc:
        print(f"genied-replay: malformed trace: {exc}", file=sys.stderr)
        return 1
    except GeniedError as exc:
        print(f"genied-replay: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    rendered = render_json(report) if args.report == "json" else render_text(report)
    sys.stdout.write(rendered)
    return 0


def main_harness(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="genied-harness",
        description="run the inspection scaffolds and print their suggestions",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument(
        "--live",
        action="store_true",
        help="use the live provider (requires GENIED_API_KEY)",
    )
    parser.add_argument("--seed", type=int, default=None, help="mock seed")
    parser.add_argument("--model", help="override the configured model")
    parser.add_argument(
        "--scaffold",
        action="append",
        metavar="NAME",
        help="run only this scaffold (repeatable)",
    )
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.model:
            config = dc_replace(
                config, provider=dc_replace(config.provider, model=args.model)
            )
        if args.seed is not None:
            config = dc_replace(
                config, provider=dc_replace(config.provider, mock_seed=args.seed)
            )
        provider = _build_provider(config, mock=not args.live)
        output = run_harness(provider, config, names=args.scaffold)
    except (ConfigError, GeniedError) as exc:
        print(f"genied-harness: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(output)
    return 0


def main_trace(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="genied-trace", description="trace tooling"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    rec = sub.add_parser(
        "record",
        help="serve one stdio session, teeing its events into a trace file",
    )
    rec.add_argument("--out", required=True, metavar="PATH", help="trace output file")
    rec.add_argument("--config", metavar="PATH", help="JSON config file")
    rec.add_argument("--mock", action="store_true", help="use the mock provider")
    args = parser.parse_args(argv)
    _setup_logging()
    try:
        config = load_config(args.config)
        provider = _build_provider(config, args.mock)
        with open(args.out, "w", encoding="utf-8") as sink:
            server = StdioServer(
                config,
                provider,
                sys.stdin.buffer,
                sys.stdout.buffer,
                recorder=TraceRecorder(sink),
            )
            server.run()
    except ConfigError as exc:
        print(f"genied-trace: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0
    return 0

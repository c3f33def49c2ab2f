"""JSON-RPC 2.0 server over stdio and WebSocket.

Threading shape, per session:

* one reader (stdin thread or the WebSocket handler) that stamps each frame
  with a monotonic millisecond time at receipt and enqueues it;
* one owner loop that pops the queue, dispatches into the engine, and is
  the only writer of outbound frames, so responses and notifications are
  totally ordered;
* provider worker threads that post request outcomes back onto the same
  queue instead of touching state themselves.

The debounce timer is the queue timeout: the loop sleeps until the engine's
next scheduled fire time and ticks when the wait elapses.
"""
from __future__ import annotations

import json
import logging
import queue
import threading
import time
from typing import BinaryIO, Callable

from ..config import GeniedConfig
from ..engine import SessionEngine, ThreadedRunner, Ticket
from ..errors import GeniedError, UnknownMethod
from ..trace import TraceRecorder
from .dispatch import Dispatcher
from .framing import FramingError, read_frame, write_frame

log = logging.getLogger(__name__)

PARSE_ERROR = -32700
INVALID_REQUEST = -32600
INTERNAL_ERROR = -32603


class OwnerLoop:
    """The serialized event path for one client session."""

    def __init__(
        self,
        config: GeniedConfig,
        provider,
        send: Callable[[dict], None],
        recorder: TraceRecorder | None = None,
        on_exit: Callable[[], None] | None = None,
    ):
        self._send = send
        self._on_exit = on_exit
        self._queue: queue.Queue = queue.Queue()
        self._clock0 = time.monotonic()
        self._runner = ThreadedRunner(provider, self._post_outcome)
        self.engine = SessionEngine(
            config, self._runner, self._notify, recorder=recorder
        )
        self._dispatcher = Dispatcher(self.engine, config)
        self._closed = False

    def now_ms(self) -> int:
        return int((time.monotonic() - self._clock0) * 1000)

    # Called from reader threads.
    def submit_frame(self, raw: str | bytes) -> None:
        self._queue.put(("frame", raw, self.now_ms()))

    def close(self) -> None:
        self._queue.put(("eof", None, self.now_ms()))

    # Called from provider worker threads.
    def _post_outcome(self, ticket: Ticket, status: str, payload: object) -> None:
        self._queue.put(("outcome", (ticket, status, payload), self.now_ms()))

    def _notify(self, method: str, params: dict) -> None:
        self._send({"jsonrpc": "2.0", "method": method, "params": params})

    def run(self) -> None:
        try:
            while True:
                timeout = self._next_timeout()
                try:
                    kind, data, at = self._queue.get(timeout=timeout)
                except queue.Empty:
                    self.engine.tick(self.now_ms())
                    continue
                if kind == "eof":
                    break
                if kind == "outcome":
                    ticket, status, payload = data
                    self.engine.on_outcome(ticket, status, payload, at)
                else:
                    self._handle_frame(data, at)
                wake = self.engine.next_wake()
                if wake is not None and self.now_ms() >= wake:
                    self.engine.tick(self.now_ms())
                if self.engine.shutdown_requested:
                    break
        finally:
            self._closed = True
            self._runner.shutdown()
            if self._on_exit is not None:
                self._on_exit()

    def _next_timeout(self) -> float | None:
        wake = self.engine.next_wake()
        if wake is None:
            return None
        return max(0, wake - self.now_ms()) / 1000.0

    def _handle_frame(self, raw: str | bytes, at: int) -> None:
        try:
            message = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._send_error(None, PARSE_ERROR, f"parse error: {exc}")
            return
        if (
            not isinstance(message, dict)
            or message.get("jsonrpc") != "2.0"
            or not isinstance(message.get("method"), str)
        ):
            msg_id = message.get("id") if isinstance(message, dict) else None
            self._send_error(msg_id, INVALID_REQUEST, "invalid request envelope")
            return
        msg_id = message.get("id")
        method = message["method"]
        params = message.get("params", {})
        if not isinstance(params, dict):
            self._send_error(msg_id, INVALID_REQUEST, "params must be an object")
            return
        try:
            result = self._dispatcher.handle(method, params, at)
        except UnknownMethod as exc:
            if msg_id is not None:
                self._send_error(msg_id, exc.rpc_code, str(exc))
            return
        except GeniedError as exc:
            if msg_id is not None:
                self._send_error(msg_id, exc.rpc_code, str(exc))
            return
        except Exception as exc:
            log.exception("handler crashed for %s", method)
            if msg_id is not None:
                self._send_error(msg_id, INTERNAL_ERROR, f"internal error: {exc}")
            return
        if msg_id is not None:
            self._send({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def _send_error(self, msg_id, code: int, message: str) -> None:
        self._send(
            {
                "jsonrpc": "2.0",
                "id": msg_id,
                "error": {"code": code, "message": message},
            }
        )


class StdioServer:
    """One session over stdin/stdout with Content-Length framing."""

    def __init__(
        self,
        config: GeniedConfig,
        provider,
        stdin: BinaryIO,
        stdout: BinaryIO,
        recorder: TraceRecorder | None = None,
    ):
        self._stdin = stdin
        self._stdout = stdout
        self._write_lock = threading.Lock()
        self._loop = OwnerLoop(config, provider, self._send, recorder=recorder)

    def _send(self, message: dict) -> None:
        payload = json.dumps(message, ensure_ascii=False).encode("utf-8")
        with self._write_lock:
            write_frame(self._stdout, payload)

    def _read_loop(self) -> None:
        try:
            while True:
                frame = read_frame(self._stdin)
                if frame is None:
                    break
                self._loop.submit_frame(frame)
        except FramingError as exc:
            log.error("stdio framing error, closing session: %s", exc)
        except Exception:
            log.exception("stdio reader crashed")
        finally:
            self._loop.close()

    def run(self) -> None:
        reader = threading.Thread(target=self._read_loop, daemon=True, name="stdin-reader")
        reader.start()
        self._loop.run()


class WebSocketServer:
    """One session per WebSocket connection; one JSON-RPC message per frame."""

    def __init__(self, config: GeniedConfig, provider_factory: Callable[[], object],
                 host: str = "127.0.0.1", port: int = 8137):
        self._config = config
        self._provider_factory = provider_factory
        self.host = host
        self.port = port
        self._server = None

    def _handler(self, connection) -> None:
        send_lock = threading.Lock()

        def send(message: dict) -> None:
            with send_lock:
                connection.send(json.dumps(message, ensure_ascii=False))

        def on_exit() -> None:
            try:
                connection.close()
            except Exception:
                pass

        loop = OwnerLoop(
            self._config, self._provider_factory(), send, on_exit=on_exit
        )
        owner = threading.Thread(target=loop.run, daemon=True, name="session-owner")
        owner.start()
        try:
            for raw in connection:
                loop.submit_frame(raw)
        except Exception as exc:
            log.info("connection ended: %s", exc)
        finally:
            loop.close()
            owner.join(timeout=5)

    def serve_forever(self) -> None:
        from websockets.sync.server import serve

        with serve(self._handler, self.host, self.port) as server:
            self._server = server
            log.info("listening on ws://%s:%d", self.host, self.port)
            server.serve_forever()

"""Method table: wire method names and params to engine calls.

Shared by every transport and by trace replay, so a recorded method name
means exactly the same thing everywhere. Params use camelCase on the wire;
validation here is strict: a missing or mistyped param is InvalidParams,
not a crash deeper down.
"""
from __future__ import annotations

from ..config import GeniedConfig
from ..engine import SessionEngine
from ..errors import InvalidParams, UnknownMethod


def _field(params: dict, key: str, kind, required: bool = True, default=None):
    if key not in params:
        if required:
            raise InvalidParams(f"missing param {key!r}")
        return default
    value = params[key]
    if kind is int and isinstance(value, bool):
        raise InvalidParams(f"param {key!r} must be an integer")
    if not isinstance(value, kind):
        raise InvalidParams(f"param {key!r} must be {kind.__name__}")
    return value


class Dispatcher:
    def __init__(self, engine: SessionEngine, config: GeniedConfig):
        self._engine = engine
        self._config = config

    def handle(self, method: str, params: dict, at: int):
        engine = self._engine
        if method == "initialize":
            return engine.initialize(params, at)
        if method == "document/didOpen":
            uri = _field(params, "uri", str)
            text = _field(params, "text", str)
            version = _field(params, "version", int, required=False, default=0)
            engine.did_open(uri, text, version, at)
            return {"uri": uri, "version": version}
        if method == "document/didChange":
            return engine.did_change(
                uri=_field(params, "uri", str),
                start=_field(params, "start", int),
                end=_field(params, "end", int),
                text=_field(params, "text", str),
                at=at,
            )
        if method == "cursor/didMove":
            engine.did_move(
                uri=_field(params, "uri", str),
                offset=_field(params, "offset", int),
                at=at,
            )
            return None
        if method == "chat/typing":
            engine.chat_typing(at)
            return None
        if method == "chat/sendMessage":
            body = _field(params, "body", str)
            if not body:
                raise InvalidParams("body must be non-empty")
            return engine.chat_send_message(body, at)
        if method == "suggestions/accept":
            return engine.accept(_field(params, "suggestionId", str), at)
        if method == "suggestions/dismiss":
            return engine.dismiss(at)
        if method == "suggestions/trigger":
            return engine.trigger(at)
        if method == "config/update":
            enabled = _field(params, "enabledTypes", list, required=False)
            if enabled is not None and not all(isinstance(t, str) for t in enabled):
                raise InvalidParams("enabledTypes must be a list of strings")
            return engine.config_update(
                at=at,
                task=_field(params, "task", str, required=False),
                task_source=_field(
                    params, "taskSource", str, required=False, default="user"
                ),
                enabled=enabled,
                model=_field(params, "model", str, required=False),
            )
        if method == "session/state":
            return engine.session_state_wire()
        if method == "shutdown":
            return engine.shutdown(at)
        if method == "replay/injectEvent":
            # Privileged: lets a replay driver stamp event times itself.
            # Hidden (indistinguishable from undefined) unless enabled.
            if not self._config.rpc.allow_inject:
                raise UnknownMethod("method not found: replay/injectEvent")
            t_ms = _field(params, "t_ms", int)
            inner_event = _field(params, "event", str)
            inner_params = _field(params, "payload", dict, required=False, default={})
            if inner_event == "replay/injectEvent":
                raise InvalidParams("injectEvent cannot nest")
            return self.handle(inner_event, inner_params, at=t_ms)
        raise UnknownMethod(f"method not found: {method}")

"""LLM backends: a live chat-completions client and a deterministic mock.

Both implement ``complete(request) -> ProviderResponse`` with exactly one
terminal outcome per request: a response, a typed error, or Cancelled.
Cancellation is cooperative and prompt; the live client polls its signal
every 50 ms so a cancel is acknowledged well inside 100 ms even while the
transport is still waiting on the network.
"""
from __future__ import annotations

import json
import os
import random
import threading
from dataclasses import dataclass, field

import httpx

from .config import ProviderSettings
from .errors import (
    Cancelled,
    ConfigError,
    HttpError,
    ProviderError,
    ProviderTimeout,
    RateLimited,
)
from .prompt import PromptBundle, parse_enabled_types
from .suggestions import display_label

API_KEY_ENV = "GENIED_API_KEY"

_CANCEL_POLL_S = 0.05
_RETRY_BACKOFF_S = 1.0
_RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

# Sections that read as instructions go into the system message; the rest
# describe the user's situation and go into the user message.
_SYSTEM_SECTIONS = frozenset(
    {"system-preamble", "format-instructions", "one-shot-example", "enabled-types"}
)
_USER_HEADERS = {
    "task-description": "Task:",
    "chat-history": "Recent chat:",
    "code-context": "Code around the cursor:",
}


class CancellationToken:
    """Shared flag the session owner sets to abandon an in-flight request."""

    def __init__(self) -> None:
        self._event = threading.Event()

    def cancel(self) -> None:
        self._event.set()

    def is_cancelled(self) -> bool:
        return self._event.is_set()

    def wait(self, timeout_s: float) -> bool:
        return self._event.wait(timeout_s)


@dataclass(frozen=True)
class Usage:
    input_tokens: int
    output_tokens: int
    estimated: bool

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")


@dataclass(frozen=True)
class ProviderRequest:
    bundle: PromptBundle
    model: str
    max_output_tokens: int = 1024
    cancel: CancellationToken = field(default_factory=CancellationToken)
    # Set on the plain-chat path: real role/content turns for the API,
    # carried alongside the bundle the digest and estimates come from.
    chat_turns: tuple[tuple[str, str], ...] | None = None


@dataclass(frozen=True)
class ProviderResponse:
    raw_text: str
    usage: Usage
    latency_ms: int = 0


def estimate_tokens(text: str) -> int:
    """Offline token estimate: ceil(chars / 4)."""
    return (len(text) + 3) // 4


def render_messages(req: ProviderRequest) -> list[dict]:
    """Flatten a bundle into chat-completions messages."""
    if req.chat_turns is not None:
        return [{"role": role, "content": body} for role, body in req.chat_turns]
    system_parts = []
    user_parts = []
    for s in req.bundle.sections:
        if s.name in _SYSTEM_SECTIONS:
            system_parts.append(s.text)
        else:
            user_parts.append(f"{_USER_HEADERS[s.name]}\n{s.text}")
    messages = []
    if system_parts:
        messages.append({"role": "system", "content": "\n\n".join(system_parts)})
    if user_parts:
        messages.append({"role": "user", "content": "\n\n".join(user_parts)})
    return messages


class MockProvider:
    """Deterministic stand-in: output is a pure function of (seed, bundle).

    For suggestion prompts it emits a parseable three-item JSON array whose
    tags come only from the bundle's own enabled-types section; half the
    time (deterministically) the payload arrives fenced, which downstream
    code must cope with either way.
    """

    def __init__(self, seed: int = 0, latency_ms: int = 0):
        self.seed = seed
        self.latency_ms = latency_ms

    def complete(self, req: ProviderRequest) -> ProviderResponse:
        if req.cancel.is_cancelled():
            raise Cancelled("cancelled before dispatch")
        rng = random.Random(f"{self.seed}:{req.bundle.content_digest()}")
        if req.bundle.section("format-instructions") is not None:
            raw = self._suggestion_payload(req.bundle, rng)
        else:
            raw = self._chat_reply(req.bundle, rng)
        messages = render_messages(req)
        usage = Usage(
            input_tokens=estimate_tokens("".join(m["content"] for m in messages)),
            output_tokens=estimate_tokens(raw),
            estimated=False,
        )
        return ProviderResponse(raw_text=raw, usage=usage, latency_ms=self.latency_ms)

    def _suggestion_payload(self, bundle: PromptBundle, rng: random.Random) -> str:
        enabled_section = bundle.section("enabled-types")
        enabled = parse_enabled_types(enabled_section.text) if enabled_section else ()
        if not enabled:
            enabled = ("improvement",)
        if len(enabled) >= 3:
            tags = rng.sample(list(enabled), 3)
        else:
            tags = [enabled[i % len(enabled)] for i in range(3)]
        items = []
        for i, tag in enumerate(tags, start=1):
            marker = rng.randrange(1000, 10000)
            items.append(
                {
                    "tag": tag,
                    "description": (
                        f"Mock {display_label(tag)} suggestion {i} (variant {marker})."
                    ),
                    "code": f"# {tag} example {marker}\npass",
                    "explanation": (
                        f"Deterministic mock explanation for a {display_label(tag)} "
                        f"item, variant {marker}."
                    ),
                }
            )
        payload = json.dumps(items, indent=2)
        if rng.random() < 0.5:
            return f"```json\n{payload}\n```"
        return payload

    def _chat_reply(self, bundle: PromptBundle, rng: random.Random) -> str:
        history = bundle.section("chat-history")
        last_line = history.text.splitlines()[-1] if history else ""
        return f"Mock reply {rng.randrange(1000, 10000)} to: {last_line[:80]}"


class HttpProvider:
    """Chat-completions client over HTTPS.

    The key comes from the environment only; one retry on 5xx/429 with a
    one-second backoff; cancellation is honored even mid-request by running
    the transport on a helper thread and polling the token.
    """

    def __init__(self, settings: ProviderSettings, client: httpx.Client | None = None):
        key = os.environ.get(API_KEY_ENV)
        if not key:
            raise ConfigError(f"{API_KEY_ENV} is not set; live provider needs a key")
        self._settings = settings
        self._client = client or httpx.Client(timeout=settings.timeout_ms / 1000.0)
        self._headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }

    def complete(self, req: ProviderRequest) -> ProviderResponse:
        if req.cancel.is_cancelled():
            raise Cancelled("cancelled before dispatch")
        messages = render_messages(req)
        body = {
            "model": req.model,
            "messages": messages,
            "max_tokens": req.max_output_tokens,
        }
        response = self._post_cancellable(body, req.cancel)
        return self._to_response(response, messages)

    def _post_cancellable(self, body: dict, cancel: CancellationToken) -> httpx.Response:
        for attempt in (1, 2):
            outcome: list = []

            def _call() -> None:
                try:
                    outcome.append(
                        self._client.post(
                            f"{self._settings.base_url}/chat/completions",
                            headers=self._headers,
                            json=body,
                        )
                    )
                except Exception as exc:  # delivered to the waiting thread
                    outcome.append(exc)

            worker = threading.Thread(target=_call, daemon=True)
            worker.start()
            while worker.is_alive():
                if cancel.wait(_CANCEL_POLL_S):
                    # Abandon the transport; the worker's eventual result
                    # is discarded so only this outcome is ever observed.
                    raise Cancelled("cancelled while request was in flight")
            result = outcome[0]
            if isinstance(result, httpx.TimeoutException):
                raise ProviderTimeout(
                    f"no response within {self._settings.timeout_ms} ms"
                ) from None
            if isinstance(result, Exception):
                raise ProviderError(f"transport failure: {result}") from None
            if result.status_code in _RETRYABLE_STATUSES and attempt == 1:
                if cancel.wait(_RETRY_BACKOFF_S):
                    raise Cancelled("cancelled during retry backoff")
                continue
            if result.status_code == 429:
                raise RateLimited("rate limited after retry")
            if result.status_code >= 400:
                raise HttpError(result.status_code, f"HTTP {result.status_code}")
            return result
        raise AssertionError("unreachable: retry loop must return or raise")

    def _to_response(self, response: httpx.Response, messages: list[dict]) -> ProviderResponse:
        try:
            payload = response.json()
            raw = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from None
        usage = payload.get("usage") or {}
        if "prompt_tokens" in usage and "completion_tokens" in usage:
            resolved = Usage(
                input_tokens=int(usage["prompt_tokens"]),
                output_tokens=int(usage["completion_tokens"]),
                estimated=False,
            )
        else:
            resolved = Usage(
                input_tokens=estimate_tokens("".join(m["content"] for m in messages)),
                output_tokens=estimate_tokens(raw),
                estimated=True,
            )
        try:
            latency = int(response.elapsed.total_seconds() * 1000)
        except RuntimeError:
            latency = 0
        return ProviderResponse(raw_text=raw, usage=resolved, latency_ms=latency)

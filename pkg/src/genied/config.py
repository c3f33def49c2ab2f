"""Daemon configuration: typed settings loaded from a JSON document.

The config file is a nested JSON object; each top-level key corresponds to
one settings dataclass below (``scheduler.t_code_quiet_ms`` lives at
``{"scheduler": {"t_code_quiet_ms": ...}}``). Every field has a default, so
an empty document (or no ``--config`` at all) yields a working daemon.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError


@dataclass(frozen=True)
class SchedulerSettings:
    # Quiet window after a code change (debounce) and after chat
    # interactions (suppression). The chat window must be the larger one.
    t_code_quiet_ms: int = 5000
    t_chat_quiet_ms: int = 30000

    def __post_init__(self):
        if self.t_code_quiet_ms <= 0 or self.t_chat_quiet_ms <= 0:
            raise ConfigError("scheduler quiet windows must be positive")
        if self.t_chat_quiet_ms <= self.t_code_quiet_ms:
            raise ConfigError(
                "scheduler.t_chat_quiet_ms must exceed scheduler.t_code_quiet_ms"
            )


@dataclass(frozen=True)
class WorkspaceSettings:
    context_window_chars: int = 500

    def __post_init__(self):
        if self.context_window_chars <= 0:
            raise ConfigError("workspace.context_window_chars must be positive")


@dataclass(frozen=True)
class PromptSettings:
    history_messages: int = 10
    assets_dir: str | None = None
    # Extra label -> canonical-type entries merged over the built-in alias
    # table, so deployments can revisit what counts as which type.
    type_aliases: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.history_messages < 0:
            raise ConfigError("prompt.history_messages must be >= 0")


@dataclass(frozen=True)
class ProviderSettings:
    model: str = "gpt-4o"
    base_url: str = "https://api.openai.com/v1"
    timeout_ms: int = 30000
    max_output_tokens: int = 1024
    mock_seed: int = 0
    # Virtual latency applied by the replay runner between firing a mock
    # request and delivering its completion (0 = instantaneous).
    mock_latency_ms: int = 0

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise ConfigError("provider.timeout_ms must be positive")
        if self.mock_latency_ms < 0:
            raise ConfigError("provider.mock_latency_ms must be >= 0")


@dataclass(frozen=True)
class PricingSettings:
    table_path: str | None = None
    autocomplete_model: str = "codestral"


@dataclass(frozen=True)
class SessionSettings:
    # Append-only JSONL event log; doubles as a replayable trace.
    log_path: str | None = None


@dataclass(frozen=True)
class RpcSettings:
    # Gates the privileged replay/injectEvent method.
    allow_inject: bool = False


@dataclass(frozen=True)
class GeniedConfig:
    scheduler: SchedulerSettings = field(default_factory=SchedulerSettings)
    workspace: WorkspaceSettings = field(default_factory=WorkspaceSettings)
    prompt: PromptSettings = field(default_factory=PromptSettings)
    provider: ProviderSettings = field(default_factory=ProviderSettings)
    pricing: PricingSettings = field(default_factory=PricingSettings)
    session: SessionSettings = field(default_factory=SessionSettings)
    rpc: RpcSettings = field(default_factory=RpcSettings)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GeniedConfig":
        if not isinstance(data, dict):
            raise ConfigError("config document must be a JSON object")
        sections = {}
        for f in dataclasses.fields(cls):
            raw = data.get(f.name, {})
            if not isinstance(raw, dict):
                raise ConfigError(f"config section {f.name!r} must be an object")
            section_cls = _SECTION_TYPES[f.name]
            known = {g.name for g in dataclasses.fields(section_cls)}
            unknown = set(raw) - known
            if unknown:
                raise ConfigError(
                    f"unknown key(s) in config section {f.name!r}: {sorted(unknown)}"
                )
            try:
                sections[f.name] = section_cls(**raw)
            except TypeError as exc:
                raise ConfigError(f"bad config section {f.name!r}: {exc}") from exc
        unknown_sections = set(data) - set(_SECTION_TYPES)
        if unknown_sections:
            raise ConfigError(f"unknown config section(s): {sorted(unknown_sections)}")
        return cls(**sections)


_SECTION_TYPES = {
    "scheduler": SchedulerSettings,
    "workspace": WorkspaceSettings,
    "prompt": PromptSettings,
    "provider": ProviderSettings,
    "pricing": PricingSettings,
    "session": SessionSettings,
    "rpc": RpcSettings,
}


def load_config(path: str | Path | None) -> GeniedConfig:
    """Load config from a JSON file; ``None`` yields all defaults."""
    if path is None:
        return GeniedConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return GeniedConfig.from_dict(data)

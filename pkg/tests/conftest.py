from __future__ import annotations

import json
from pathlib import Path

import pytest

from genied.config import GeniedConfig
from genied.cost import PricingTable

TRACES_DIR = Path(__file__).parent / "traces"
CORPUS_DIR = Path(__file__).parent / "corpus"


@pytest.fixture
def config() -> GeniedConfig:
    return GeniedConfig()


@pytest.fixture
def pricing() -> PricingTable:
    return PricingTable.load()


@pytest.fixture
def write_config(tmp_path):
    """Write a config dict to a JSON file; returns the path."""

    def _write(data: dict, name: str = "config.json") -> Path:
        p = tmp_path / name
        p.write_text(json.dumps(data), encoding="utf-8")
        return p

    return _write

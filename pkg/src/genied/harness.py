"""Inspection harness: three ready-made working situations.

Relevance of live suggestions is a human judgment, not an assertion a test
can make. This harness runs the full prompt -> provider -> parse pipeline
on three scaffolds (a hobby project, a ticket-driven industry task, and a
school assignment with a narrowed type set) and prints every suggestion for
eyeballing. With the mock provider it doubles as a deterministic smoke test
of the same pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass

from .config import GeniedConfig
from .cost import CostLedger, PricingTable
from .errors import GeniedError
from .parser import parse_response
from .prompt import TaskDescription, build_suggestion_prompt
from .provider import ProviderRequest
from .suggestions import resolve_type
from .workspace import Cursor, Document, extract_context


@dataclass(frozen=True)
class Scaffold:
    name: str
    summary: str
    uri: str
    text: str
    cursor_offset: int
    enabled_labels: tuple[str, ...]
    task: TaskDescription | None = None


_CALCULATOR = '''\
class Calculator:
    """A small four-function calculator with memory."""

    def __init__(self):
        self.memory = 0.0

    def add(self, a, b):
        return a + b

    def subtract(self, a, b):
        return a - b

    def multiply(self, a, b):
        return a * b

    def divide(self, a, b):
        return a / b

    def store(self, value):
        self.memory = value
'''

_INFERENCE = '''\
def run_inference(model, examples):
    results = []
    for example in examples:
        features = preprocess(example)
        prediction = model.predict(features)
        results.append(postprocess(prediction))
    return results
'''

_ASSIGNMENT = '''\
def count_vowels(word):
    count = 0
    for i in range(len(word)):
        if word[i] in "aeiou":
            count = count + 1
    return count

def is_palindrome(word):
    reversed_word = ""
    for ch in word:
        reversed_word = ch + reversed_word
    if word == reversed_word:
        return True
'''

SCAFFOLDS: tuple[Scaffold, ...] = (
    Scaffold(
        name="personal-project",
        summary="hobby calculator class, every suggestion category enabled",
        uri="file:///scaffolds/calculator.py",
        text=_CALCULATOR,
        cursor_offset=_CALCULATOR.index("def divide"),
        enabled_labels=(
            "improvement",
            "explanation",
            "brainstorm",
            "test",
            "bug-fix",
            "syntax-hint",
        ),
    ),
    Scaffold(
        name="industry-ticket",
        summary="batch inference loop with a pasted ticket as the task",
        uri="file:///scaffolds/inference.py",
        text=_INFERENCE,
        cursor_offset=len(_INFERENCE),
        enabled_labels=("improvement", "brainstorm", "test"),
        task=TaskDescription(
            text=(
                "PERF-2141: run_inference processes examples one at a time; "
                "throughput is too low for the nightly batch job. Parallelize "
                "inference across examples (thread pool or batching) without "
                "changing the function's interface or result order."
            ),
            source="imported-ticket",
        ),
    ),
    Scaffold(
        name="school-assignment",
        summary="string-exercise homework with Debugging/Efficiency/Improvements enabled",
        uri="file:///scaffolds/assignment.py",
        text=_ASSIGNMENT,
        cursor_offset=_ASSIGNMENT.index("def is_palindrome"),
        # The narrowed set a student might pick, spelled with everyday labels
        # that resolve through the alias table.
        enabled_labels=("Debugging", "Efficiency", "Improvements"),
    ),
)


def run_scaffold(scaffold: Scaffold, provider, config: GeniedConfig, ledger: CostLedger) -> list[str]:
    """Run one scaffold through prompt/provider/parse; returns printable lines."""
    enabled = frozenset(resolve_type(label) for label in scaffold.enabled_labels)
    doc = Document(uri=scaffold.uri, text=scaffold.text)
    context = extract_context(
        doc,
        Cursor(uri=scaffold.uri, offset=scaffold.cursor_offset),
        config.workspace.context_window_chars,
    )
    bundle = build_suggestion_prompt(
        context=context,
        enabled=enabled,
        settings=config.prompt,
        model=config.provider.model,
        task=scaffold.task,
    )
    lines = [
        f"== {scaffold.name}: {scaffold.summary}",
        f"   enabled: {', '.join(sorted(enabled))}",
    ]
    if scaffold.task is not None:
        lines.append(f"   task ({scaffold.task.source}): {scaffold.task.text[:100]}")
    response = provider.complete(
        ProviderRequest(
            bundle=bundle,
            model=bundle.model,
            max_output_tokens=config.provider.max_output_tokens,
        )
    )
    entry = ledger.record(
        request_id=scaffold.name,
        model=bundle.model,
        input_tokens=response.usage.input_tokens,
        output_tokens=response.usage.output_tokens,
        estimated=response.usage.estimated,
    )
    try:
        group = parse_response(response.raw_text, enabled, group_id=scaffold.name)
    except GeniedError as exc:
        lines.append(f"   UNPARSEABLE RESPONSE ({type(exc).__name__}): {exc}")
        lines.append(f"   raw: {response.raw_text[:200]}")
        return lines
    for s in group.suggestions:
        lines.append(f"   [{s.tag}] {s.display_description}")
        if s.code:
            lines.extend("      | " + code_line for code_line in s.code.splitlines())
        if s.explanation:
            lines.append(f"      note: {s.explanation}")
    cost = "unpriced" if entry.cost_micro is None else f"{entry.cost_micro} micro-USD"
    estimated = " (estimated)" if entry.estimated else ""
    lines.append(
        f"   usage: {entry.input_tokens} in / {entry.output_tokens} out{estimated}, {cost}"
    )
    return lines


def run_harness(provider, config: GeniedConfig, names: list[str] | None = None) -> str:
    table = PricingTable.load(config.pricing.table_path)
    ledger = CostLedger(table)
    wanted = set(names) if names else None
    out: list[str] = []
    for scaffold in SCAFFOLDS:
        if wanted is not None and scaffold.name not in wanted:
            continue
        out.extend(run_scaffold(scaffold, provider, config, ledger))
        out.append("")
    totals = ledger.totals()
    out.append(
        f"total: {totals['requests']} requests, {totals['input_tokens']} in / "
        f"{totals['output_tokens']} out tokens, ${totals['cost_usd']}"
    )
    return "\n".join(out) + "\n"

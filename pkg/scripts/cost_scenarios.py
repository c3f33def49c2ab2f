"""Print the cost model's worked numbers for a quick sanity read.

Covers per-request prices from the shipped table, the reference
frequency/price-ratio scenarios with their multipliers, and a concrete
month of usage at a configurable request shape.
"""
from __future__ import annotations

import argparse

from genied.cost import (
    SUBSCRIPTION_NOTE,
    PricingTable,
    UsageScenario,
    format_usd,
    input_price_ratio,
    reference_scenarios,
    request_cost,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input-tokens", type=int, default=10_000)
    parser.add_argument("--output-tokens", type=int, default=100)
    parser.add_argument(
        "--requests-per-day", type=int, default=200, help="autocomplete-rate baseline"
    )
    args = parser.parse_args()

    table = PricingTable.load()
    print(f"request shape: {args.input_tokens} in / {args.output_tokens} out tokens")
    print()
    print("per-request cost by model:")
    for model in table.models():
        entry = table.lookup(model)
        micro = request_cost(args.input_tokens, args.output_tokens, entry)
        print(f"  {model:12s} ${format_usd(micro)}")
    print()

    ratio = input_price_ratio(table, "gpt-4o", "codestral")
    print(f"input-price ratio gpt-4o/codestral: {ratio}")
    print()

    print("reference scenarios (cost multiplier = 1 + p*r):")
    for row in reference_scenarios(table):
        print(
            f"  {row['name']:32s} r={row['r']:<6g} p={row['p']:<4g} "
            f"multiplier={row['multiplier']:g}"
        )
    print()

    month = UsageScenario(
        name="one month at the configured rate",
        f_auto=args.requests_per_day * 30,
        f_pro=args.requests_per_day * 30 // 10,
        c_auto_micro=request_cost(
            args.input_tokens, args.output_tokens, table.lookup("codestral")
        ),
        c_pro_micro=request_cost(
            args.input_tokens, args.output_tokens, table.lookup("gpt-4o")
        ),
    )
    print(f"{month.name}:")
    print(f"  autocomplete: {month.f_auto} requests, ${format_usd(month.total_auto_micro)}")
    print(f"  proactive:    {month.f_pro} requests, ${format_usd(month.total_pro_micro)}")
    print(f"  p={month.p:g} r={month.r:.4f} multiplier={month.multiplier:.4f}")
    print()
    print(SUBSCRIPTION_NOTE)


if __name__ == "__main__":
    main()

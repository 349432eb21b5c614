"""
Empirical resilience map
========================

Sweep the number of corrupted validators for each client-side construction
and print how many seeds stayed safe and live. The pattern of full and
partial cells is the resilience region each construction claims.
"""

import sys

from resilience_lab import ScenarioConfig, sweep

SEEDS = int(sys.argv[1]) if len(sys.argv) > 1 else 10

scenarios = [
    ("internal protocol", ScenarioConfig("internal", 6, q=4)),
    ("freezing wrapper", ScenarioConfig("frz", 6, q=4)),
    ("gossip queue", ScenarioConfig("livestar", 6)),
    ("quorum queue (q=2)", ScenarioConfig("liveq", 5, q=2)),
    ("signature chains", ScenarioConfig("ds", 4)),
]

for title, base in scenarios:
    result = sweep(base, range(base.n + 1), SEEDS)
    print(f"{title}  n={base.n}  ({SEEDS} seeds per cell)")
    print("   f  safe  live")
    for cell in result.cells:
        print(f"  {cell.f_or_beta:>2}  {cell.safe_count:>4}  {cell.live_count:>4}")
    print()

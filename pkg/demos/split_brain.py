"""
Split brain against the bare internal protocol, and against the freezing wrapper
================================================================================

A quorum of corrupted validators runs two consistent-looking executions and
shows each to a different client. The bare protocol's clients end up with
conflicting logs; clients behind the freezing wrapper exchange what they saw
and stop advancing instead.
"""

from resilience_lab import ScenarioConfig, execute


def show(outcome):
    print(outcome.verdict.line())
    for label, logs in outcome.trace.client_logs.items():
        print(f"  {label} final log: {list(logs[-1])}")
    print()


# six validators, quorum four, four of them corrupted
print("bare internal protocol, f = q = 4")
show(execute(ScenarioConfig("internal", 6, f=4, attack="split_brain")))

# same attack, clients now relay certificates and wait before outputting
print("freezing wrapper, every validator corrupted")
show(execute(ScenarioConfig("frz", 6, f=6, q=4, attack="split_brain")))

# below the quorum the attack cannot mint a second certificate
print("bare internal protocol, f = 3")
show(execute(ScenarioConfig("internal", 6, f=3, attack="split_brain")))

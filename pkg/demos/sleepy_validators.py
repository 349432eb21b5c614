"""
Sleeping validators and the threshold fork choice
=================================================

With φ = 3/4 the threshold rule stays live while the adversary controls at
most a quarter of the awake validators. Putting honest validators to sleep
raises that share; past 1 − φ the honest votes can no longer reach the
threshold and the chain stops growing, though it never forks.
"""

from fractions import Fraction

from resilience_lab import ScenarioConfig, execute

for beta in ("1/5", "3/10"):
    config = ScenarioConfig("goldfish", 11, phi=Fraction(3, 4), seed=1,
                            attack="sleepy_da_attack", attack_params=(("beta", beta),))
    outcome = execute(config)
    awake = min(len(a) for a in outcome.world.awake_history)
    print(f"beta={beta}: {len(outcome.world.corrupted)} corrupted, as few as {awake} awake")
    print(f"  {outcome.verdict.line()}")
    print(f"  final log length: {len(outcome.trace.client_logs['k1'][-1])}")
    print()

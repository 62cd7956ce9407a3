"""
Order, coupling and who sets the pace
=====================================

Seeded channel simulations: how often a receiver sees messages out of
order, how aggregation weakens the coupling between source and receiver,
and what happens to a receiver's queue under push and pull.
"""

import numpy as np

from causaltrace.channel_sim import (
    ChannelConfig,
    poisson_bursts,
    run_coupling_experiment,
    run_order_experiment,
    run_push_pull,
)

seeds = range(100)

# without sequence numbers, any spread in latency scrambles order
print("latency width | mean inversions (unreliable) | max inversions (reliable)")
for width in (0, 1, 2, 5, 10, 20):
    loose = [run_order_experiment(ChannelConfig(latency_width=width, seed=s), 100).inversions for s in seeds]
    tight = [
        run_order_experiment(ChannelConfig(reliability="reliable", latency_width=width, drop_probability=0.1, seed=s), 100).inversions
        for s in seeds
    ]
    print(f"{width:>13} | {np.mean(loose):>28.1f} | {max(tight):>25}")

# one assessment per n events: the receiver's clock runs n times slower
print("\n  n | e          | 1/n        | T_R / T_S")
for n in (1, 2, 5, 10, 50, 100):
    r = run_coupling_experiment(2.0, n, 100 * n)
    print(f"{n:>3} | {r.e:.6f} | {1 / n:.6f} | {r.T_R / r.T_S:.2f}")

# a source that imposes faster than the receiver can serve
bursts = poisson_bursts(1.5, 2000, seed=3)
for mode, kwargs in (("push", {"queue_limit": 50}), ("pull", {"quota": 5})):
    r = run_push_pull(ChannelConfig(mode=mode), bursts, 1.0, **kwargs)
    print(f"\n{mode}: {r.as_dict()}")

"""
What survives aggregation
=========================

Category information lost by mixing streams, choosing a sampling interval
from the autocorrelation time, and a week of five-minute buckets that
forget old weeks at a fixed rate.
"""

import numpy as np

from causaltrace.channel_sim import square_wave
from causaltrace.metrics import (
    BucketSeries,
    CategorizedStream,
    SampleSeries,
    missed_transitions,
    mixing_entropy,
    recommend_sampling,
    significance,
)

# mixing without labels leaves the receiver maximally uncertain
for k in (2, 4, 8):
    stream = CategorizedStream.from_counts({f"s{i}": 10 * (i + 1) for i in range(k)})
    mixed, kept = mixing_entropy(stream, False), mixing_entropy(stream, True)
    print(f"|S|={k}: unlabelled S={mixed.S_ent:.3f} ({significance(mixed)}), "
          f"labelled S={kept.S_ent:.3f} ({significance(kept)}), source H={kept.source_entropy:.3f}")

# the autocorrelation time sets a safe sampling interval
t = np.arange(4096)
for period in (16, 64, 256):
    advice = recommend_sampling(np.sin(2 * np.pi * t / period))
    print(f"sine period {period:>3}: tau={advice.autocorr_time:>3}, sample every {advice.recommended_interval}")

noise = np.random.default_rng(11).normal(size=4096)
print("white noise:", recommend_sampling(noise))

# sampling a square wave too slowly hides its transitions
wave = square_wave(8, 256)
for interval in (1, 2, 4, 8, 16):
    print(f"interval {interval:>2}: missed transitions {missed_transitions(wave, interval)}")

decimated = SampleSeries(np.sin(2 * np.pi * t / 64)).decimate(6)
print("decimated by 6:", recommend_sampling(decimated))

# three weeks of a daily cycle folded into one week of buckets
series = BucketSeries()
rng = np.random.default_rng(5)
for ts in range(0, 3 * 7 * 86400, 300):
    series.update(ts, round(10 + 5 * np.sin(2 * np.pi * ts / 86400) + rng.normal(), 3))
means, weights = series.means(), series.weights()
print(f"{len(series)} buckets; weight per bucket {weights[0]:.2f} (1 + 3/5 + 9/25)")
print("hourly means, first day:", np.round(means[:288:12], 1))

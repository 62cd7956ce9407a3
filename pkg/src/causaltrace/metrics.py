"""Information measures for aggregated monitoring data.

* ``mixing_entropy``: what a receiver can still tell about the category of
  each item after aggregation, with and without source labels.
* ``recommend_sampling``: autocorrelation time of a series and a sampling
  interval of about half that.
* ``BucketSeries``: a fixed set of cyclic buckets (e.g. a week of 5-minute
  slots) that folds observations in idempotently and forgets old cycles
  geometrically.
"""

from __future__ import annotations

import ast
import csv
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

WEEK = 7 * 24 * 3600
FIVE_MINUTES = 5 * 60
DEFAULT_DECAY = Fraction(3, 5)


# ---------------------------------------------------------------- entropy


def shannon_entropy(probabilities: Iterable[float]) -> float:
    """Entropy in bits; zero-probability terms contribute nothing."""
    p = np.asarray(list(probabilities), dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) if p.size else 0.0


@dataclass(frozen=True)
class CategorizedStream:
    items: tuple[tuple[object, str | None], ...]
    alphabet: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet contains duplicates")
        known = set(self.alphabet)
        for _, label in self.items:
            if label is not None and label not in known:
                raise ValueError(f"label {label!r} not in alphabet")

    @classmethod
    def from_counts(cls, counts: dict[str, int]) -> "CategorizedStream":
        items = [(f"{label}-{i}", label) for label, n in counts.items() for i in range(n)]
        return cls(tuple(items), tuple(counts))


@dataclass(frozen=True)
class EntropyReport:
    S_ent: float
    per_category_posterior: dict[str, float]
    max_possible: float
    item_posteriors: np.ndarray = field(repr=False)
    source_entropy: float | None = None


def mixing_entropy(stream: CategorizedStream, labelled: bool) -> EntropyReport:
    """Category uncertainty left to a receiver of the aggregated stream.

    With labels kept, each item's category is known exactly (a point-mass
    posterior).  Without them every item is indistinguishable, so the only
    consistent posterior is uniform over the alphabet and the per-item
    entropy is ``log2 |alphabet|``.  ``S_ent`` is the mean per-item entropy.
    """
    k = len(stream.alphabet)
    if k == 0:
        raise ValueError("empty alphabet")
    index = {label: i for i, label in enumerate(stream.alphabet)}
    n = len(stream.items)
    post = np.full((n, k), 1.0 / k)
    for row, (_, label) in enumerate(stream.items):
        if labelled and label is not None:
            post[row] = 0.0
            post[row, index[label]] = 1.0
    item_entropy = [shannon_entropy(row) for row in post]
    s_ent = float(np.mean(item_entropy)) if n else math.log2(k)
    marginal = post.mean(axis=0) if n else np.full(k, 1.0 / k)

    source = None
    if labelled and n and all(label is not None for _, label in stream.items):
        source = shannon_entropy(marginal)
    return EntropyReport(
        S_ent=s_ent,
        per_category_posterior={label: float(marginal[i]) for label, i in index.items()},
        max_possible=math.log2(k),
        item_posteriors=post,
        source_entropy=source,
    )


def significance(report: EntropyReport) -> str | float:
    """``"none"`` at maximum entropy, ``"maximal"`` at zero entropy, and
    otherwise ``1 - S_ent / max_possible``."""
    if math.isclose(report.S_ent, report.max_possible, abs_tol=1e-12):
        return "none"
    if math.isclose(report.S_ent, 0.0, abs_tol=1e-12):
        return "maximal"
    return 1.0 - report.S_ent / report.max_possible


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SampleSeries:
    values: np.ndarray
    spacing: int = 1

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.values.ndim != 1 or self.values.size < 2:
            raise ValueError("need a 1-d series of at least two samples")

    def decimate(self, interval: int) -> "SampleSeries":
        """Keep every sample ``interval`` ticks apart (``interval`` must be a
        multiple of the current spacing)."""
        step, rem = divmod(interval, self.spacing)
        if rem or step < 1:
            raise ValueError(f"interval {interval} is not a positive multiple of spacing {self.spacing}")
        return SampleSeries(self.values[::step], self.spacing * step)


@dataclass(frozen=True)
class SamplingAdvice:
    autocorr_time: int
    recommended_interval: int


def autocorrelation(values: Sequence[float]) -> np.ndarray:
    """Normalized (biased) autocorrelation for lags 0..n-1, via FFT."""
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        raise ValueError("no signal: series has zero variance")
    n = x.size
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(x, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    return acov / denom


def recommend_sampling(series: SampleSeries | Sequence[float]) -> SamplingAdvice:
    """Autocorrelation time (first lag where the normalized autocorrelation
    drops below 1/e, in ticks) and a sampling interval of half that."""
    if not isinstance(series, SampleSeries):
        series = SampleSeries(np.asarray(series, dtype=float))
    r = autocorrelation(series.values)
    below = np.nonzero(r[1:] < 1.0 / math.e)[0]
    if below.size == 0:
        raise ValueError("autocorrelation never falls below 1/e; series too short for this timescale")
    tau = int(below[0] + 1) * series.spacing
    return SamplingAdvice(tau, max(1, tau // 2))


def missed_transitions(series: Sequence[float], interval: int) -> int:
    """Level changes in ``series`` that a sample-and-hold reconstruction from
    every ``interval``-th point fails to show."""
    full = np.asarray(series)
    if interval < 1:
        raise ValueError("interval must be >= 1")
    held = np.repeat(full[::interval], interval)[: full.size]
    actual = int(np.count_nonzero(np.diff(full)))
    seen = int(np.count_nonzero(np.diff(held)))
    return max(0, actual - seen)


def read_series_csv(path: str | os.PathLike, column: int = -1) -> np.ndarray:
    """Numbers from one column of a CSV file; a non-numeric first row is
    taken as a header."""
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values.append(float(row[column]))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise ValueError(f"{path}:{lineno}: not a number: {row!r}") from None
    return np.asarray(values)


def write_series_csv(path: str | os.PathLike, values: Sequence[float], spacing: int = 1) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "value"])
        for i, v in enumerate(values):
            writer.writerow([i * spacing, repr(float(v))])


# ---------------------------------------------------------------- buckets


@dataclass
class Bucket:
    cycle: int = -1
    # weighted sums scaled to ``cycle``: exact, so merge order never matters
    total: Fraction = Fraction(0)
    weight: Fraction = Fraction(0)
    # (cycle, label, value) of every observation folded in
    seen: set[tuple[int, Hashable, Fraction]] = field(default_factory=set)

    @property
    def mean(self) -> float | None:
        return float(self.total / self.weight) if self.weight else None


class BucketSeries:
    """Cyclic accumulator of time-labelled samples.

    ``period // width`` buckets wrap like a clock face.  Each bucket holds a
    running weighted mean; when a bucket is revisited in a later cycle its
    existing weight is multiplied by ``decay`` per cycle elapsed, so older
    history fades at a constant rate.  Arithmetic is exact (fractions) so the
    state depends only on the multiset of observations, not their order.
    """

    def __init__(self, period: int = WEEK, width: int = FIVE_MINUTES, decay: Fraction | float | str = DEFAULT_DECAY):
        if period <= 0 or width <= 0:
            raise ValueError("period and width must be positive")
        if period % width:
            raise ValueError(f"period {period} is not a whole number of {width}-wide buckets")
        self.period = period
        self.width = width
        self.decay = Fraction(decay).limit_denominator(10**6) if isinstance(decay, float) else Fraction(decay)
        if not 0 < self.decay <= 1:
            raise ValueError("decay must be in (0, 1]")
        self.buckets = [Bucket() for _ in range(period // width)]

    def __len__(self) -> int:
        return len(self.buckets)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BucketSeries):
            return NotImplemented
        return self.dumps() == other.dumps()

    def index(self, timestamp: int | float) -> int:
        return int((timestamp % self.period) // self.width)

    def cycle(self, timestamp: int | float) -> int:
        return int(timestamp // self.period)

    def update(self, timestamp: int | float, value: float, label: Hashable | None = None) -> bool:
        """Fold one observation in.  ``label`` names the interval the value
        belongs to (default: the absolute interval number of ``timestamp``);
        a repeated ``(label, value)`` pair within the same cycle is ignored.  Returns whether the
        state changed."""
        if label is None:
            label = int(timestamp // self.width)
        v = Fraction(value)
        bucket = self.buckets[self.index(timestamp)]
        c = self.cycle(timestamp)
        if (c, label, v) in bucket.seen:
            return False
        bucket.seen.add((c, label, v))
        if c > bucket.cycle:
            if bucket.cycle >= 0:
                fade = self.decay ** (c - bucket.cycle)
                bucket.total *= fade
                bucket.weight *= fade
            bucket.cycle = c
            w = Fraction(1)
        else:
            w = self.decay ** (bucket.cycle - c)
        bucket.total += w * v
        bucket.weight += w
        return True

    def means(self) -> np.ndarray:
        return np.array([np.nan if b.mean is None else b.mean for b in self.buckets])

    def weights(self) -> np.ndarray:
        return np.array([float(b.weight) for b in self.buckets])

    def dumps(self) -> str:
        lines = [f"period\t{self.period}", f"width\t{self.width}", f"decay\t{self.decay}"]
        for i, b in enumerate(self.buckets):
            if b.cycle < 0:
                continue
            lines.append(f"B\t{i}\t{b.cycle}\t{b.total}\t{b.weight}")
            for c, label, v in sorted(b.seen, key=lambda item: (item[0], repr(item[1]), item[2])):
                lines.append(f"L\t{i}\t{c}\t{label!r}\t{v}")
        return "".join(line + "\n" for line in lines)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "BucketSeries":
        header: dict[str, str] = {}
        rows = text.splitlines()
        for row in rows[:3]:
            key, _, value = row.partition("\t")
            header[key] = value
        try:
            series = cls(int(header["period"]), int(header["width"]), Fraction(header["decay"]))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"bad bucket series header: {exc}") from None
        for lineno, row in enumerate(rows[3:], start=4):
            fields = row.split("\t")
            try:
                if fields[0] == "B":
                    b = series.buckets[int(fields[1])]
                    b.cycle = int(fields[2])
                    b.total = Fraction(fields[3])
                    b.weight = Fraction(fields[4])
                elif fields[0] == "L":
                    series.buckets[int(fields[1])].seen.add(
                        (int(fields[2]), ast.literal_eval(fields[3]), Fraction(fields[4]))
                    )
                else:
                    raise ValueError(f"unknown record {fields[0]!r}")
            except (ValueError, IndexError, SyntaxError) as exc:
                raise ValueError(f"line {lineno}: malformed bucket record: {exc}") from None
        return series

    @classmethod
    def load(cls, path: str | os.PathLike) -> "BucketSeries":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def bucket_update(series: BucketSeries, timestamp: int | float, value: float, label: Hashable | None = None) -> bool:
    return series.update(timestamp, value, label)

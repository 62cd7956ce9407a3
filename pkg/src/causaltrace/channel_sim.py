"""Seeded discrete-tick simulations of promise channels.

Three experiments:

* order: does a receiver sample messages in the order a source emitted them?
  Only when the source numbers them and the receiver promises to reorder.
* coupling: a receiver that emits one assessment per ``n`` received events
  is coupled to the source with strength ``e = lambda_R / lambda_S ~ 1/n``.
* push/pull: a source imposing messages fills the receiver's queue; a
  receiver pulling by quota never holds more than it asked for.

All randomness comes from ``numpy.random.default_rng(seed)``; the same seed
and configuration always reproduce the same report.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_SEED = 20190603


class Mode(str, enum.Enum):
    PUSH = "push"
    PULL = "pull"


class Reliability(str, enum.Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"


@dataclass(frozen=True)
class ChannelConfig:
    mode: Mode = Mode.PUSH
    reliability: Reliability = Reliability.UNRELIABLE
    # delivery delay is uniform on the integers latency_min..latency_min+latency_width
    latency_min: int = 0
    latency_width: int = 0
    drop_probability: float = 0.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "reliability", Reliability(self.reliability))
        if self.latency_min < 0 or self.latency_width < 0:
            raise ValueError("latency bounds must be non-negative")
        if not 0.0 <= self.drop_probability < 1.0:
            raise ValueError("drop_probability must be in [0, 1)")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass
class SimAgent:
    id: str
    role: str
    emit_rate: float = 0.0
    service_rate: float = 0.0
    interior_clock: int = 0

    def tick(self) -> int:
        self.interior_clock += 1
        return self.interior_clock


@dataclass(frozen=True)
class Message:
    source: str
    seq: int | None
    payload: str | None
    emit_tick: int
    deliver_tick: int | None


def kendall_tau_distance(order: Sequence[int]) -> int:
    """Number of pairs that appear in the wrong relative order."""
    items = list(order)

    def sort_count(xs):
        if len(xs) < 2:
            return xs, 0
        mid = len(xs) // 2
        left, a = sort_count(xs[:mid])
        right, b = sort_count(xs[mid:])
        merged, count, i, j = [], a + b, 0, 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                count += len(left) - i
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, count

    return sort_count(items)[1]


# ------------------------------------------------------------------- order


@dataclass(frozen=True)
class OrderReport:
    inversions: int
    recovered: bool
    messages_sent: int
    sampled: int
    dropped: int
    in_flight: int
    retransmissions: int = 0
    sampled_order: tuple[int, ...] = field(default=(), repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("sampled_order")
        return d


def _latency(rng: np.random.Generator, config: ChannelConfig) -> int:
    return config.latency_min + int(rng.integers(0, config.latency_width + 1))


def run_order_experiment(config: ChannelConfig, n_messages: int) -> OrderReport:
    """One source emits ``n_messages`` (one per tick) through a channel with
    random bounded delay.

    Unreliable channels lose messages with ``drop_probability`` and deliver
    the rest in arrival order; simultaneous arrivals are serialized in a
    random order by the receiving queue.  Reliable channels number every
    message, retransmit losses and release messages to the sampler strictly
    in sequence.
    """
    if n_messages < 1:
        raise ValueError("n_messages must be >= 1")
    rng = config.rng()
    source = SimAgent("S", "source", emit_rate=1.0)
    reliable = config.reliability is Reliability.RELIABLE

    arrivals: list[tuple[int, float, Message]] = []
    dropped = 0
    retransmissions = 0
    for seq in range(n_messages):
        emit = source.tick()
        deliver = emit + _latency(rng, config)
        lost = rng.random() < config.drop_probability
        while lost and reliable:
            # the sender keeps its promise by resending until delivered
            retransmissions += 1
            deliver += 1 + _latency(rng, config)
            lost = rng.random() < config.drop_probability
        if lost:
            dropped += 1
            continue
        msg = Message(source.id, seq if reliable else None, f"m{seq}", emit, deliver)
        arrivals.append((deliver, float(rng.random()), msg))

    arrivals.sort(key=lambda a: (a[0], a[1]))
    arrived_seq = [int(m.payload[1:]) for _, _, m in arrivals]
    if reliable:
        sampled_order = _resequence(arrivals)
    else:
        sampled_order = arrived_seq
    inversions = kendall_tau_distance(sampled_order)
    return OrderReport(
        inversions=inversions,
        recovered=inversions == 0,
        messages_sent=n_messages,
        sampled=len(sampled_order),
        dropped=dropped,
        in_flight=n_messages - len(sampled_order) - dropped,
        retransmissions=retransmissions,
        sampled_order=tuple(sampled_order),
    )


def _resequence(arrivals) -> list[int]:
    """Receiver side of a numbered channel: hold early arrivals until the
    gap before them is filled."""
    expected = 0
    held: set[int] = set()
    released = []
    for _, _, msg in arrivals:
        held.add(msg.seq)
        while expected in held:
            held.remove(expected)
            released.append(expected)
            expected += 1
    return released


# ---------------------------------------------------------------- coupling


@dataclass(frozen=True)
class CouplingReport:
    T_S: float
    T_R: float
    e: float
    messages_sent: int
    assessments_emitted: int
    aggregation: int
    duration: int

    def as_dict(self) -> dict:
        return asdict(self)


def run_coupling_experiment(
    source_rate: float,
    aggregation: int,
    duration: int,
    seed: int = DEFAULT_SEED,
) -> CouplingReport:
    """Source emits Poisson(``source_rate``) events per tick; the receiver
    samples all of them and promises one assessment per ``aggregation``
    events received.  Inter-event times are measured on the receiver's tick
    clock."""
    if aggregation < 1:
        raise ValueError("aggregation must be >= 1")
    if source_rate <= 0:
        raise ValueError("source_rate must be positive")
    if source_rate * duration < 100 * aggregation:
        raise ValueError(
            f"duration {duration} at rate {source_rate} spans fewer than 100*n = {100 * aggregation} source events"
        )
    rng = np.random.default_rng(seed)
    per_tick = rng.poisson(source_rate, size=duration)
    emit_ticks = np.repeat(np.arange(1, duration + 1), per_tick)
    sent = int(emit_ticks.size)
    # assessment k is emitted when the (k*n)-th event arrives
    assess_ticks = emit_ticks[aggregation - 1 :: aggregation]
    emitted = int(assess_ticks.size)

    def mean_gap(ticks: np.ndarray) -> float:
        if ticks.size < 2:
            return float("inf")
        return float(np.diff(ticks).mean())

    return CouplingReport(
        T_S=mean_gap(emit_ticks),
        T_R=mean_gap(assess_ticks),
        e=emitted / sent if sent else 0.0,
        messages_sent=sent,
        assessments_emitted=emitted,
        aggregation=aggregation,
        duration=duration,
    )


# ---------------------------------------------------------------- push/pull


@dataclass(frozen=True)
class QueueReport:
    mode: str
    messages_sent: int
    sampled: int
    dropped: int
    in_flight: int
    queue_max: int
    withheld: int
    duration: int

    def as_dict(self) -> dict:
        return asdict(self)


def poisson_bursts(rate: float, duration: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Messages offered by the source at each tick."""
    return np.random.default_rng(seed).poisson(rate, size=duration)


def run_push_pull(
    config: ChannelConfig,
    bursts: Sequence[int],
    service_rate: float,
    queue_limit: int | None = None,
    quota: int = 1,
) -> QueueReport:
    """Feed ``bursts[t]`` new messages per tick to a receiver that can sample
    ``service_rate`` messages per tick.

    Push: every offered message is imposed on the receiver's queue at once;
    arrivals beyond ``queue_limit`` are dropped.  Pull: the source holds its
    messages until the receiver invites them, and the receiver never invites
    more than ``quota`` beyond what it already holds.
    """
    if service_rate <= 0:
        raise ValueError("service_rate must be positive")
    if quota < 1:
        raise ValueError("quota must be >= 1")
    bursts = [int(b) for b in bursts]
    if any(b < 0 for b in bursts):
        raise ValueError("bursts must be non-negative")
    receiver = SimAgent("R", "receiver", service_rate=service_rate)

    sent = sampled = dropped = 0
    queue = 0
    queue_max = 0
    backlog = 0  # messages waiting at the source (pull only)
    credit = 0.0
    for offered in bursts:
        if config.mode is Mode.PUSH:
            sent += offered
            room = offered if queue_limit is None else max(0, min(offered, queue_limit - queue))
            dropped += offered - room
            queue += room
        else:
            backlog += offered
            invited = min(backlog, max(0, quota - queue))
            backlog -= invited
            sent += invited
            queue += invited
        queue_max = max(queue_max, queue)

        credit += service_rate
        served = min(queue, int(credit))
        credit -= served
        queue -= served
        if queue == 0:
            # an idle receiver cannot bank capacity for later
            credit = min(credit, 1.0)
        sampled += served
        for _ in range(served):
            receiver.tick()

    return QueueReport(
        mode=config.mode.value,
        messages_sent=sent,
        sampled=sampled,
        dropped=dropped,
        in_flight=queue,
        queue_max=queue_max,
        withheld=backlog,
        duration=len(bursts),
    )


# ---------------------------------------------------------------- sampling


def sample_series(series: Sequence[float] | np.ndarray, interval: int) -> np.ndarray:
    """Keep every ``interval``-th sample."""
    if interval < 1:
        raise ValueError("interval must be >= 1")
    return np.asarray(series)[::interval]


def square_wave(period: int, length: int, phase: int = 0) -> np.ndarray:
    t = np.arange(length) + phase
    return ((t % period) < period // 2).astype(float)

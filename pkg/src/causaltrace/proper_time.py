"""Interior (proper) time for a single process.

Signpost numbers come from one process-wide counter so that concurrently
running lanes still receive globally unique, gap-free values.  Each lane
keeps its own subtime counter for detail events under its current
signpost.  Nothing here reads the wall clock except ``TimestampContext``,
which is display context only.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import NamedTuple

MAIN_LANE = "main"
PROGRAM_START = 0

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S %z"


class ClockError(LookupError):
    """Raised for operations on lanes the clock does not know about."""


@dataclass(frozen=True)
class TimestampContext:
    """Calendar time captured at event creation. Never used for ordering."""

    wall_clock: datetime

    @classmethod
    def now(cls) -> "TimestampContext":
        return cls(datetime.now().astimezone())

    def render(self) -> str:
        zone = self.wall_clock.tzname() or "UTC"
        return f"{self.wall_clock.strftime(TIMESTAMP_FORMAT)} {zone}"

    @classmethod
    def parse(cls, text: str) -> "TimestampContext":
        """Inverse of :meth:`render`: ``YYYY-MM-DD HH:MM:SS +ZZZZ ZONE``."""
        stamp, _, zone = text.strip().rpartition(" ")
        if not stamp:
            raise ValueError(f"bad timestamp {text!r}")
        parsed = datetime.strptime(stamp, TIMESTAMP_FORMAT)
        offset = parsed.utcoffset() or timedelta(0)
        return cls(parsed.replace(tzinfo=timezone(offset, zone)))

    def __str__(self) -> str:
        return self.render()


@dataclass
class LaneState:
    """Counters owned by one logical thread of the process."""

    lane_id: str
    current_signpost: int
    current_subtime: int = 1
    # a forked lane's first signpost is rendered as a fork ("go>")
    pending_fork: bool = False
    parent: str | None = None


class Advance(NamedTuple):
    root: int
    now: int
    forked: bool


@dataclass
class ProcessClock:
    process_id: str
    next_signpost: int = 1
    lanes: dict[str, LaneState] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _forks: int = field(default=0, repr=False)

    def lane(self, lane_id: str) -> LaneState:
        try:
            return self.lanes[lane_id]
        except KeyError:
            raise ClockError(f"no such lane: {lane_id!r}") from None

    def advance(self, lane_id: str) -> Advance:
        """Allocate a fresh signpost on ``lane_id`` and return its back-link."""
        with self._lock:
            lane = self.lane(lane_id)
            now = self.next_signpost
            self.next_signpost += 1
            root = lane.current_signpost
            forked = lane.pending_fork
            lane.current_signpost = now
            lane.current_subtime = 1
            lane.pending_fork = False
            return Advance(root, now, forked)

    def advance_signpost(self, lane_id: str) -> tuple[int, int]:
        root, now, _ = self.advance(lane_id)
        return root, now

    def tick_subtime(self, lane_id: str) -> tuple[int, int]:
        with self._lock:
            lane = self.lane(lane_id)
            lane.current_subtime += 1
            return lane.current_signpost, lane.current_subtime

    def fork_lane(self, parent_lane: str) -> LaneState:
        """Start a new lane whose first signpost links back to the parent's
        current signpost.

        The new lane's signpost number is allocated when it first advances,
        so a parent that keeps running keeps the lower numbers.
        """
        with self._lock:
            parent = self.lane(parent_lane)
            self._forks += 1
            lane_id = f"lane-{self._forks}"
            lane = LaneState(
                lane_id,
                current_signpost=parent.current_signpost,
                pending_fork=True,
                parent=parent.lane_id,
            )
            self.lanes[lane_id] = lane
            return lane

    def allocated(self) -> range:
        """Every signpost number handed out so far."""
        return range(1, self.next_signpost)


def new_clock(process_id: str) -> ProcessClock:
    clock = ProcessClock(process_id)
    clock.lanes[MAIN_LANE] = LaneState(MAIN_LANE, current_signpost=PROGRAM_START)
    return clock

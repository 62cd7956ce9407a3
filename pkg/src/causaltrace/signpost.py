"""Instrumentation API for marking significant events.

Usage mirrors a builder chain::

    tracer = Tracer("myApp", "17778")
    tracer.signpost("code signpost X") \\
        .intent("open file X") \\
        .relies_on("/etc/passed", "file") \\
        .part_of("main", "coroutine")

Every annotation writes exactly one detail event into the journal and
carries at most one typed relation for the concept graph.
"""

from __future__ import annotations

import threading
from typing import Callable

from .journal import Event, EventKind, Journal
from .proper_time import MAIN_LANE, ProcessClock, TimestampContext, new_clock
from .relations import (
    DEFINITE,
    MAY,
    SIGNPOST_NS,
    ConceptKey,
    Relation,
    RelationAnnotation,
)


class SignpostError(ValueError):
    pass


class Tracer:
    """Owns one process's journal and clock and hands out signpost handles."""

    def __init__(
        self,
        process_name: str,
        pid: str,
        clock: ProcessClock | None = None,
        timestamps: Callable[[], TimestampContext | None] | None = TimestampContext.now,
    ):
        self.journal = Journal(process_name, str(pid))
        self.clock = clock if clock is not None else new_clock(self.journal.process_id)
        self._timestamps = timestamps or (lambda: None)
        self._lock = threading.RLock()
        self._live: dict[str, SignpostHandle] = {}

    def signpost(self, text: str, lane: str = MAIN_LANE) -> "SignpostHandle":
        _require_text(text)
        with self._lock:
            root, now, forked = self.clock.advance(lane)
            kind = EventKind.FORK if forked else EventKind.SIGNPOST
            self._emit(kind, root, now, 1, text, None, None)
            previous = self._live.get(lane)
            if previous is not None:
                previous._closed = True
            handle = SignpostHandle(self, lane, now, text, root)
            self._live[lane] = handle
            return handle

    def fork(self, parent_lane: str = MAIN_LANE) -> str:
        """Open a concurrent lane; its first signpost links back to the
        parent lane's current signpost."""
        return self.clock.fork_lane(parent_lane).lane_id

    def _emit(self, kind, root, now, delta, text, cls, annotation) -> Event:
        event = Event(
            self.journal.process_id, kind, root, now, delta, text, cls, self._timestamps(), annotation
        )
        self.journal.append(event)
        return event

    def _detail(self, handle: "SignpostHandle", cls: str, text: str, annotation_kind) -> None:
        with self._lock:
            if handle._closed:
                raise SignpostError(f"stale handle: signpost {handle.number} ({handle.text!r}) is closed")
            now, delta = self.clock.tick_subtime(handle.lane)
            annotation = None
            if annotation_kind is not None:
                relation, sign, verb, confidence = annotation_kind
                annotation = RelationAnnotation(
                    relation, sign, handle.concept, ConceptKey(cls, text), verb, confidence
                )
            self._emit(EventKind.DETAIL, None, now, delta, text, cls, annotation)


def _require_text(text: str) -> None:
    if not text or not text.strip():
        raise SignpostError("empty annotation")


def _require_namespace(namespace: str) -> None:
    if not namespace or not namespace.strip():
        raise SignpostError("namespace required")


class SignpostHandle:
    """Annotation context for one signpost. Closes when its lane moves on."""

    def __init__(self, tracer: Tracer, lane: str, number: int, text: str, root: int):
        self.tracer = tracer
        self.lane = lane
        self.number = number
        self.text = text
        self.root = root
        self._closed = False

    def __repr__(self) -> str:
        state = "closed" if self._closed else "live"
        return f"<SignpostHandle {self.root}->{self.number} {self.text!r} {state}>"

    @property
    def closed(self) -> bool:
        return self._closed

    @property
    def concept(self) -> ConceptKey:
        return ConceptKey(SIGNPOST_NS, self.text)

    def close(self) -> None:
        self._closed = True

    def intent(self, text: str) -> "SignpostHandle":
        _require_text(text)
        self.tracer._detail(self, "intent", text, (Relation.EXPRESSES, "+", "intent", DEFINITE))
        return self

    def relies_on(self, name: str, namespace: str) -> "SignpostHandle":
        """Record a dependency, a potential cause of what happens here."""
        _require_text(name)
        _require_namespace(namespace)
        self.tracer._detail(self, namespace, name, (Relation.FOLLOWS, "+", "may determine", MAY))
        return self

    def failed_because(self, text: str) -> "SignpostHandle":
        _require_text(text)
        self.tracer._detail(self, "remarked", text, (Relation.EXPRESSES, "+", "remarked", DEFINITE))
        return self

    def remark(self, text: str) -> "SignpostHandle":
        _require_text(text)
        self.tracer._detail(self, "remarked", text, (Relation.EXPRESSES, "+", "remarked", DEFINITE))
        return self

    def part_of(self, name: str, namespace: str) -> "SignpostHandle":
        _require_text(name)
        _require_namespace(namespace)
        # the signpost is contained by the named concept
        self.tracer._detail(self, namespace, name, (Relation.CONTAINS, "-", "part of", DEFINITE))
        return self

    def note(self, text: str) -> "SignpostHandle":
        _require_text(text)
        self.tracer._detail(self, "btw", text, (Relation.EXPRESSES, "+", "btw", DEFINITE))
        return self

    def attribute(self, name: str, namespace: str) -> "SignpostHandle":
        _require_text(name)
        _require_namespace(namespace)
        self.tracer._detail(self, namespace, name, (Relation.EXPRESSES, "+", "attribute", DEFINITE))
        return self

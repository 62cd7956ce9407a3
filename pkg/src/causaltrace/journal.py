"""Append-only per-process event journal.

A journal is the raw causal history of one process: every signpost points
back to the signpost it followed, and detail events hang off the signpost
that was current in their lane.  Journals serialize to a line-oriented,
tab-separated file with an interning table for repeated text, and render to
the human-readable timeline format::

    2019-06-03 13:40:04 +0200 CEST  |    0 -->   1,1      MainLoop start
    2019-06-03 13:40:04 +0200 CEST  |       ->   1,2        [function: main]
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .proper_time import PROGRAM_START, TimestampContext
from .relations import (
    SIGNPOST_NS,
    ConceptKey,
    Relation,
    RelationAnnotation,
    UNNAMED_CLASSES,
)

MAGIC = "#causaltrace-journal 1"
TIMESTAMP_WIDTH = 30
RULE_WIDTH = 90


class JournalError(ValueError):
    """Invalid journal content; ``line`` is set when reading from a file."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}: " if path is not None else f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class EventKind(str, enum.Enum):
    SIGNPOST = "SIGNPOST"
    DETAIL = "DETAIL"
    FORK = "FORK"


MARKERS = {EventKind.SIGNPOST: "-->", EventKind.DETAIL: " ->", EventKind.FORK: "go>"}


@dataclass(frozen=True)
class Event:
    process_id: str
    kind: EventKind
    root: int | None
    now: int
    delta: int
    text: str
    detail_class: str | None = None
    timestamp: TimestampContext | None = None
    annotation: RelationAnnotation | None = None

    def __post_init__(self):
        if "\n" in self.text or "\r" in self.text:
            raise JournalError("event text must be a single line")
        if self.kind is EventKind.DETAIL:
            if self.root is not None:
                raise JournalError("detail events carry no root")
            if self.delta < 2:
                raise JournalError(f"detail delta must be >= 2, got {self.delta}")
            if not self.detail_class:
                raise JournalError("detail events need a class")
        else:
            if self.delta != 1:
                raise JournalError(f"{self.kind.value} delta must be 1, got {self.delta}")
            if self.root is None or not 0 <= self.root < self.now:
                raise JournalError(f"signpost back-link must satisfy 0 <= root < now ({self.root}, {self.now})")

    @property
    def is_signpost(self) -> bool:
        return self.kind is not EventKind.DETAIL

    def display_text(self) -> str:
        if self.is_signpost:
            return self.text
        if self.detail_class in UNNAMED_CLASSES:
            return f"[{self.detail_class}: : {self.text}]"
        return f"[{self.detail_class}: {self.text}]"

    def concept(self) -> ConceptKey:
        """Concept this event names: the signpost itself, or the detail's object."""
        if self.is_signpost:
            return ConceptKey(SIGNPOST_NS, self.text)
        return ConceptKey(self.detail_class, self.text)


@dataclass
class FormatIntern:
    """Bijection between invariant strings and small integer ids."""

    table: dict[str, int] = field(default_factory=dict)
    strings: list[str] = field(default_factory=list)

    @property
    def next_id(self) -> int:
        return len(self.strings)

    def intern(self, text: str) -> int:
        ident = self.table.get(text)
        if ident is None:
            ident = len(self.strings)
            self.table[text] = ident
            self.strings.append(text)
        return ident

    def lookup(self, ident: int) -> str:
        if not 0 <= ident < len(self.strings):
            raise KeyError(ident)
        return self.strings[ident]

    def __len__(self) -> int:
        return len(self.strings)


@dataclass
class Journal:
    process_name: str
    pid: str
    events: list[Event] = field(default_factory=list)
    intern: FormatIntern = field(default_factory=FormatIntern)
    # signpost number -> its text, for every signpost seen so far
    _signposts: dict[int, str] = field(default_factory=dict, repr=False)
    _last_delta: dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def process_id(self) -> str:
        return f"{self.process_name}/{self.pid}"

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        return iter(self.events)

    def __getitem__(self, index: int) -> Event:
        return self.events[index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Journal):
            return NotImplemented
        return (self.process_name, self.pid, self.events) == (other.process_name, other.pid, other.events)

    def signpost_text(self, number: int) -> str:
        return self._signposts[number]

    def signposts(self) -> dict[int, str]:
        return dict(self._signposts)

    def append(self, event: Event) -> None:
        if event.process_id != self.process_id:
            raise JournalError(f"event from process {event.process_id!r} in journal of {self.process_id!r}")
        if event.is_signpost:
            if event.root != PROGRAM_START and event.root not in self._signposts:
                raise JournalError(f"broken causal chain: root {event.root} was never recorded")
            if event.now in self._signposts:
                raise JournalError(f"signpost {event.now} recorded twice")
        else:
            if event.now not in self._signposts:
                raise JournalError(f"broken causal chain: detail for unknown signpost {event.now}")
            if event.delta <= self._last_delta[event.now]:
                raise JournalError(
                    f"subtime must increase: {event.now},{event.delta} after "
                    f"{event.now},{self._last_delta[event.now]}"
                )
        if event.annotation is not None:
            if event.is_signpost:
                raise JournalError("only detail events carry relation annotations")
            expected = (ConceptKey(SIGNPOST_NS, self._signposts[event.now]), event.concept())
            if (event.annotation.subject, event.annotation.object) != expected:
                raise JournalError("annotation endpoints do not match the event")
        if event.is_signpost:
            self._signposts[event.now] = event.text
        self._last_delta[event.now] = event.delta
        self.intern.intern(event.text)
        self.events.append(event)

    def extend(self, events: Iterable[Event]) -> None:
        for event in events:
            self.append(event)

    def back_chain(self, number: int) -> list[int]:
        """Signpost numbers visited following back-links from ``number`` to 0."""
        roots = {e.now: e.root for e in self.events if e.is_signpost}
        chain = [number]
        while chain[-1] != PROGRAM_START:
            if len(chain) > len(roots) + 1:
                raise JournalError("cycle in causal back-links")
            try:
                chain.append(roots[chain[-1]])
            except KeyError:
                raise JournalError(f"broken causal chain at signpost {chain[-1]}") from None
        return chain


def distance(journal: Journal, a: int, b: int) -> int:
    """Number of events between line ``a`` and line ``b``."""
    n = len(journal)
    for index in (a, b):
        if not 0 <= index < n:
            raise IndexError(f"line index {index} out of range for journal of {n} events")
    return abs(b - a)


# ---------------------------------------------------------------- rendering


def render_header(journal: Journal) -> list[str]:
    return [
        f"New process timeline for ( {journal.process_name} ) originally started as pid  {journal.pid}",
        "",
        f"{'Unix clock context':<{TIMESTAMP_WIDTH + 2}}| root --> NOW,delta  Comment indented by subtime",
        "-" * RULE_WIDTH,
    ]


def render_event(event: Event) -> str:
    stamp = event.timestamp.render() if event.timestamp is not None else ""
    root = "" if event.root is None else str(event.root)
    indent = "  " * (event.delta - 1)
    return (
        f"{stamp:<{TIMESTAMP_WIDTH}}  | {root:>4} {MARKERS[event.kind]} "
        f"{event.now:>3},{event.delta}      {indent}{event.display_text()}"
    )


def render_timeline(journal: Journal) -> str:
    lines = render_header(journal)
    lines.extend(render_event(e) for e in journal.events)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ serialization


def _encode_annotation(annotation: RelationAnnotation | None) -> str:
    if annotation is None:
        return "-"
    return "|".join((annotation.relation.value, annotation.sign, annotation.confidence, annotation.verb))


def _interned(journal: Journal) -> dict[str, int]:
    """Strings worth interning: those whose table entry costs less than
    repeating them inline."""
    counts: dict[str, int] = {}
    for event in journal.events:
        counts[event.text] = counts.get(event.text, 0) + 1
    chosen = {}
    for text, count in counts.items():
        ident = journal.intern.table[text]
        inline = len(json.dumps(text, ensure_ascii=False).encode())
        ref = len(f"#{ident}")
        entry = len(f"intern\t{ident}\t{json.dumps(text, ensure_ascii=False)}\n".encode())
        if entry + count * ref < count * inline:
            chosen[text] = ident
    return chosen


def dumps_journal(journal: Journal, intern: bool = True) -> str:
    table = _interned(journal) if intern else {}
    out = [
        MAGIC,
        f"process\t{json.dumps(journal.process_name, ensure_ascii=False)}",
        f"pid\t{json.dumps(journal.pid, ensure_ascii=False)}",
    ]
    for text, ident in sorted(table.items(), key=lambda item: item[1]):
        out.append(f"intern\t{ident}\t{json.dumps(text, ensure_ascii=False)}")
    out.append("records")
    for e in journal.events:
        text = f"#{table[e.text]}" if e.text in table else json.dumps(e.text, ensure_ascii=False)
        out.append(
            "\t".join(
                (
                    e.timestamp.render() if e.timestamp is not None else "-",
                    e.kind.value,
                    "-" if e.root is None else str(e.root),
                    str(e.now),
                    str(e.delta),
                    e.detail_class or "-",
                    text,
                    _encode_annotation(e.annotation),
                )
            )
        )
    return "\n".join(out) + "\n"


def write_journal(journal: Journal, path: str | os.PathLike, intern: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_journal(journal, intern=intern))


def _decode_string(raw: str) -> str:
    value = json.loads(raw)
    if not isinstance(value, str):
        raise ValueError("expected a JSON string")
    return value


def loads_journal(text: str, path: str | None = None) -> Journal:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    elif lines:
        raise JournalError("truncated record (missing end of line)", len(lines), path)
    if not lines or lines[0] != MAGIC:
        raise JournalError("not a causaltrace journal", 1, path)

    header: dict[str, str] = {}
    table: dict[int, str] = {}
    lineno = 1
    body_start = None
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "records":
            body_start = lineno
            break
        key, _, rest = line.partition("\t")
        try:
            if key in ("process", "pid"):
                header[key] = _decode_string(rest)
            elif key == "intern":
                ident, _, raw = rest.partition("\t")
                table[int(ident)] = _decode_string(raw)
            else:
                raise ValueError(f"unknown header field {key!r}")
        except ValueError as exc:
            raise JournalError(f"malformed header: {exc}", lineno, path) from None
    if body_start is None:
        raise JournalError("missing 'records' line", lineno, path)
    if "process" not in header or "pid" not in header:
        raise JournalError("header needs process and pid", body_start, path)

    journal = Journal(header["process"], header["pid"])
    for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
        fields = line.split("\t")
        if len(fields) != 8:
            raise JournalError(f"expected 8 fields, found {len(fields)}", lineno, path)
        stamp, kind, root, now, delta, cls, ref, rel = fields
        try:
            kind_ = EventKind(kind)
            if ref.startswith("#"):
                text_ = table[int(ref[1:])]
            else:
                text_ = _decode_string(ref)
            cls_ = None if cls == "-" else cls
            annotation = None
            if rel != "-":
                rtype, sign, confidence, verb = rel.split("|")
                subject = ConceptKey(SIGNPOST_NS, journal.signpost_text(int(now)))
                annotation = RelationAnnotation(
                    Relation(rtype), sign, subject, ConceptKey(cls_ or "", text_), verb, confidence
                )
            event = Event(
                journal.process_id,
                kind_,
                None if root == "-" else int(root),
                int(now),
                int(delta),
                text_,
                cls_,
                None if stamp == "-" else TimestampContext.parse(stamp),
                annotation,
            )
            journal.append(event)
        except JournalError as exc:
            raise JournalError(str(exc), lineno, path) from None
        except (ValueError, KeyError) as exc:
            raise JournalError(f"malformed record: {exc}", lineno, path) from None
    return journal


def read_journal(path: str | os.PathLike) -> Journal:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_journal(fh.read(), path=str(path))

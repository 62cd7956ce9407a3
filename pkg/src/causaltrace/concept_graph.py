"""Invariant concepts joined by typed spacetime relations.

The graph is built idempotently from journals.  Every observation carries an
interval label ``(journal id, signpost number)``; a node's frequency and an
edge's weight count distinct labels, so re-ingesting the same history
changes nothing and ingesting several journals in any order converges to the
same graph.

Selection rules: for an ordered pair of concepts at most one of CONTAINS,
FOLLOWS and EXPRESSES may be promised.  NEAR coexists with anything.
"""

from __future__ import annotations

import difflib
import os
from dataclasses import dataclass, field
from typing import Iterable

from .journal import Journal
from .proper_time import PROGRAM_START
from .relations import (
    BOUNDARY_NS,
    CONFIDENCES,
    DEFINITE,
    EXCLUSIVE,
    MAY,
    PROGRAM_START_KEY,
    SIGNPOST_NS,
    ConceptKey,
    Relation,
)

Label = tuple[str, int]


class IncompatibleRelation(ValueError):
    pass


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        prefix = f"{path}:" if path else ""
        if line is not None:
            prefix += f"{line}: " if path else f"line {line}: "
        elif prefix:
            prefix += " "
        super().__init__(prefix + message)


@dataclass
class ConceptNode:
    key: ConceptKey
    labels: set[Label] = field(default_factory=set)
    unlabelled: int = 0

    @property
    def frequency(self) -> int:
        return len(self.labels) + self.unlabelled

    @property
    def first_seen(self) -> Label | None:
        return min(self.labels) if self.labels else None

    @property
    def last_seen(self) -> Label | None:
        return max(self.labels) if self.labels else None


@dataclass
class ConceptEdge:
    source: ConceptKey
    target: ConceptKey
    relation: Relation
    sign: str = "+"
    confidence: str = DEFINITE
    labels: set[Label] = field(default_factory=set)
    unlabelled: int = 0

    @property
    def weight(self) -> int:
        if self.relation is Relation.NEAR:
            return 1
        return max(1, len(self.labels) + self.unlabelled)

    @property
    def key(self) -> tuple[ConceptKey, ConceptKey, Relation]:
        return (self.source, self.target, self.relation)


@dataclass
class IngestReport:
    journal: str
    nodes_added: int = 0
    edges_added: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass(frozen=True)
class ContextSet:
    alert: ConceptKey
    contexts: frozenset[ConceptKey] = frozenset()
    complete: bool = True


@dataclass(frozen=True)
class ContextCheck:
    complete: bool
    missing: tuple[ConceptKey, ...] = ()


@dataclass(frozen=True)
class PromiseRecord:
    giver: str
    receiver: str
    sign: str
    body: frozenset[str]
    condition: frozenset[str] | None = None

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise ValueError(f"promise sign must be '+' or '-', got {self.sign!r}")
        object.__setattr__(self, "body", frozenset(self.body))
        if self.condition is not None:
            object.__setattr__(self, "condition", frozenset(self.condition))

    def conveys(self, available: Iterable[str] = ()) -> bool:
        """A conditional promise conveys nothing until its condition is met."""
        return self.condition is None or self.condition <= set(available)


@dataclass(frozen=True)
class ObservabilityResult:
    observable: bool
    overlap: frozenset[str]


def observable(
    offer: PromiseRecord | None,
    accept: PromiseRecord | None,
    available: Iterable[str] = (),
) -> ObservabilityResult:
    """Whether the values offered by ``offer.giver`` can be observed by the
    agent that accepts them: both promises must exist, be unconditional (or
    have their conditions met), and the accepted set must lie inside the
    offered one."""
    if offer is not None and offer.sign != "+":
        raise ValueError("offer must be a (+) promise")
    if accept is not None and accept.sign != "-":
        raise ValueError("accept must be a (-) promise")
    if offer is None or accept is None:
        return ObservabilityResult(False, frozenset())
    if (offer.giver, offer.receiver) != (accept.receiver, accept.giver):
        raise ValueError(
            f"promises are not mirrored: {offer.giver}->{offer.receiver} vs {accept.giver}->{accept.receiver}"
        )
    available = set(available)
    overlap = offer.body & accept.body
    kept = offer.conveys(available) and accept.conveys(available)
    return ObservabilityResult(kept and accept.body <= offer.body, overlap)


class ConceptGraph:
    def __init__(self):
        self.nodes: dict[ConceptKey, ConceptNode] = {}
        self.edges: dict[tuple[ConceptKey, ConceptKey, Relation], ConceptEdge] = {}
        # (source, target) -> exclusive relation currently holding the pair
        self._exclusive: dict[tuple[ConceptKey, ConceptKey], Relation] = {}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConceptGraph):
            return NotImplemented
        return self.dumps() == other.dumps()

    def __contains__(self, key: ConceptKey) -> bool:
        return key in self.nodes

    # ------------------------------------------------------------ mutation

    def node(self, key: ConceptKey) -> ConceptNode:
        found = self.nodes.get(key)
        if found is None:
            found = self.nodes[key] = ConceptNode(key)
        return found

    def observe(self, key: ConceptKey, label: Label | None = None) -> bool:
        """Count an observation of a concept; returns True if it was new."""
        node = self.node(key)
        if label is None:
            node.unlabelled += 1
            return True
        if label in node.labels:
            return False
        node.labels.add(label)
        return True

    def add_edge(
        self,
        source: ConceptKey,
        target: ConceptKey,
        relation: Relation,
        sign: str = "+",
        confidence: str = DEFINITE,
        label: Label | None = None,
    ) -> ConceptEdge:
        relation = Relation(relation)
        if sign not in ("+", "-"):
            raise ValueError(f"orientation must be '+' or '-', got {sign!r}")
        if confidence not in CONFIDENCES:
            raise ValueError(f"unknown confidence {confidence!r}")
        pair = (source, target)
        if relation in EXCLUSIVE:
            holding = self._exclusive.get(pair)
            if holding is not None and holding is not relation:
                raise IncompatibleRelation(
                    f"incompatible relation types for pair ({source}, {target}): "
                    f"{holding.value} already promised, cannot add {relation.value}"
                )
        edge = self.edges.get((source, target, relation))
        if edge is not None and edge.sign != sign:
            raise IncompatibleRelation(
                f"incompatible relation types for pair ({source}, {target}): "
                f"{relation.value}{edge.sign} already promised, cannot add {relation.value}{sign}"
            )
        self.node(source)
        self.node(target)
        if edge is None:
            edge = self.edges[(source, target, relation)] = ConceptEdge(source, target, relation, sign, confidence)
            if relation in EXCLUSIVE:
                self._exclusive[pair] = relation
        elif confidence == DEFINITE:
            edge.confidence = DEFINITE
        if label is None:
            edge.unlabelled += 1
        else:
            edge.labels.add(label)
        return edge

    # ------------------------------------------------------------ queries

    def defined(self, key: ConceptKey) -> bool:
        """A concept counts as defined once it has been observed, not merely
        referenced by an edge."""
        node = self.nodes.get(key)
        return node is not None and node.frequency > 0

    def edges_between(self, source: ConceptKey, target: ConceptKey) -> list[ConceptEdge]:
        return [e for r in Relation if (e := self.edges.get((source, target, r))) is not None]

    def successors(self, key: ConceptKey, include_may: bool = True) -> list[ConceptEdge]:
        return sorted(
            (
                e
                for e in self.edges.values()
                if e.source == key and e.relation is Relation.FOLLOWS and e.sign == "+"
                and (include_may or e.confidence != MAY)
            ),
            key=_edge_sort_key,
        )

    def predecessors(self, key: ConceptKey, include_may: bool = True) -> list[ConceptEdge]:
        return sorted(
            (
                e
                for e in self.edges.values()
                if e.target == key and e.relation is Relation.FOLLOWS and e.sign == "+"
                and (include_may or e.confidence != MAY)
            ),
            key=_edge_sort_key,
        )

    def containment(self, key: ConceptKey) -> list[tuple[ConceptKey, ConceptEdge]]:
        """Concepts related to ``key`` by CONTAINS in either direction,
        i.e. its generalizations and its instances."""
        out = []
        for e in self.edges.values():
            if e.relation is not Relation.CONTAINS:
                continue
            if e.source == key:
                out.append((e.target, e))
            elif e.target == key:
                out.append((e.source, e))
        return sorted(out, key=lambda item: (_key_sort(item[0]), _edge_sort_key(item[1])))

    def find(self, text: str) -> ConceptKey:
        """Resolve a user-supplied concept name.

        Accepts the rendered form (``"[file: /etc/passed]"``), a bare signpost
        name, or ``namespace:name``.
        """
        if isinstance(text, ConceptKey):
            if text in self.nodes:
                return text
            text = text.display()
        by_display = [k for k in self.nodes if k.display() == text]
        if len(by_display) == 1:
            return by_display[0]
        for ns in (SIGNPOST_NS, BOUNDARY_NS):
            if ConceptKey(ns, text) in self.nodes:
                return ConceptKey(ns, text)
        ns, sep, name = text.partition(":")
        if sep and ConceptKey(ns.strip(), name.strip()) in self.nodes:
            return ConceptKey(ns.strip(), name.strip())
        names = sorted({k.display() for k in self.nodes})
        near = difflib.get_close_matches(text, names, n=3)
        hint = f"; nearest: {', '.join(near)}" if near else ""
        raise KeyError(f"unknown concept {text!r}{hint}")

    # ------------------------------------------------------------ persistence

    def dumps(self) -> str:
        lines = []
        for key in sorted(self.nodes, key=_key_sort):
            node = self.nodes[key]
            lines.append(_join("N", key.namespace, key.name, str(node.frequency)))
        for edge in sorted(self.edges.values(), key=_edge_sort_key):
            lines.append(
                _join(
                    "E", edge.relation.value, edge.sign, edge.confidence,
                    edge.source.namespace, edge.source.name,
                    edge.target.namespace, edge.target.name, str(edge.weight),
                )
            )
        for key in sorted(self.nodes, key=_key_sort):
            node = self.nodes[key]
            if node.unlabelled:
                lines.append(_join("U", "N", key.namespace, key.name, str(node.unlabelled)))
            for journal_id, number in sorted(node.labels):
                lines.append(_join("L", "N", key.namespace, key.name, journal_id, str(number)))
        for edge in sorted(self.edges.values(), key=_edge_sort_key):
            ends = (edge.relation.value, edge.source.namespace, edge.source.name,
                    edge.target.namespace, edge.target.name)
            if edge.unlabelled:
                lines.append(_join("U", "E", *ends, str(edge.unlabelled)))
            for journal_id, number in sorted(edge.labels):
                lines.append(_join("L", "E", *ends, journal_id, str(number)))
        return "".join(line + "\n" for line in lines)

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str, path: str | None = None) -> "ConceptGraph":
        graph = cls()
        freq: dict[ConceptKey, int] = {}
        weights: dict[tuple, int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line:
                continue
            fields = _split(line)
            try:
                tag = fields[0]
                if tag == "N" and len(fields) == 4:
                    key = ConceptKey(fields[1], fields[2])
                    graph.node(key)
                    freq[key] = int(fields[3])
                elif tag == "E" and len(fields) == 9:
                    rel, sign, conf, sns, sname, tns, tname, weight = fields[1:]
                    edge = ConceptEdge(
                        ConceptKey(sns, sname), ConceptKey(tns, tname), Relation(rel), sign, conf
                    )
                    if sign not in ("+", "-") or conf not in CONFIDENCES:
                        raise ValueError("bad edge orientation or confidence")
                    _restore_edge(graph, edge)
                    weights[edge.key] = int(weight)
                elif tag in ("L", "U") and fields[1] == "N" and len(fields) == (6 if tag == "L" else 5):
                    node = graph.nodes[ConceptKey(fields[2], fields[3])]
                    if tag == "L":
                        node.labels.add((fields[4], int(fields[5])))
                    else:
                        node.unlabelled = int(fields[4])
                elif tag in ("L", "U") and fields[1] == "E" and len(fields) == (9 if tag == "L" else 8):
                    ekey = (ConceptKey(fields[3], fields[4]), ConceptKey(fields[5], fields[6]), Relation(fields[2]))
                    edge = graph.edges[ekey]
                    if tag == "L":
                        edge.labels.add((fields[7], int(fields[8])))
                    else:
                        edge.unlabelled = int(fields[7])
                else:
                    raise ValueError(f"unrecognised record {fields[0]!r} with {len(fields)} fields")
            except (ValueError, KeyError, IndexError) as exc:
                raise GraphFormatError(f"malformed record: {exc}", lineno, path) from None
        for key, count in freq.items():
            node = graph.nodes[key]
            if node.frequency != count:
                # a file written without label records: keep the count as-is
                node.unlabelled = count - len(node.labels)
        for ekey, weight in weights.items():
            edge = graph.edges[ekey]
            if edge.weight != weight and edge.relation is not Relation.NEAR:
                edge.unlabelled = weight - len(edge.labels)
        return graph

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ConceptGraph":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read(), path=str(path))


def _restore_edge(graph: ConceptGraph, edge: ConceptEdge) -> None:
    pair = (edge.source, edge.target)
    if edge.relation in EXCLUSIVE:
        holding = graph._exclusive.get(pair)
        if holding is not None and holding is not edge.relation:
            raise IncompatibleRelation(f"incompatible relation types for pair ({edge.source}, {edge.target})")
        graph._exclusive[pair] = edge.relation
    graph.node(edge.source)
    graph.node(edge.target)
    graph.edges[edge.key] = edge


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str) -> str:
    out = []
    chars = iter(text)
    for ch in chars:
        if ch == "\\":
            nxt = next(chars, "")
            out.append({"\\": "\\", "t": "\t", "n": "\n"}.get(nxt, "\\" + nxt))
        else:
            out.append(ch)
    return "".join(out)


def _join(*fields: str) -> str:
    return "\t".join(_escape(f) for f in fields)


def _split(line: str) -> list[str]:
    return [_unescape(f) for f in line.split("\t")]


def _key_sort(key: ConceptKey) -> tuple[str, str]:
    return (key.namespace, key.name)


def _edge_sort_key(edge: ConceptEdge):
    return (_key_sort(edge.source), _key_sort(edge.target), edge.relation.value)


# ---------------------------------------------------------------- building


def ingest(graph: ConceptGraph, journal: Journal) -> IngestReport:
    """Fold one journal into the graph.

    Each signpost becomes a concept and its back-link a ``precedes`` edge;
    every annotated detail becomes an edge from its signpost.  Selection
    rule violations are collected in the report and skipped.
    """
    report = IngestReport(journal.process_id)
    jid = journal.process_id
    names = {0: PROGRAM_START_KEY}
    before_nodes = len(graph.nodes)
    before_edges = len(graph.edges)

    graph.observe(PROGRAM_START_KEY, (jid, PROGRAM_START))
    for event in journal.events:
        label = (jid, event.now)
        if event.is_signpost:
            key = event.concept()
            names[event.now] = key
            graph.observe(key, label)
            _try_edge(graph, report, names[event.root], key, Relation.FOLLOWS, "+", DEFINITE, label)
        elif event.annotation is not None:
            ann = event.annotation
            graph.observe(ann.object, label)
            _try_edge(graph, report, ann.subject, ann.object, ann.relation, ann.sign, ann.confidence, label)

    report.nodes_added = len(graph.nodes) - before_nodes
    report.edges_added = len(graph.edges) - before_edges
    return report


def _try_edge(graph, report, source, target, relation, sign, confidence, label) -> None:
    try:
        graph.add_edge(source, target, relation, sign, confidence, label)
    except IncompatibleRelation as exc:
        report.errors.append(f"signpost {label[1]}: {exc}")


def build_graph(journals: Iterable[Journal]) -> tuple[ConceptGraph, list[IngestReport]]:
    graph = ConceptGraph()
    reports = [ingest(graph, j) for j in journals]
    return graph, reports


# ---------------------------------------------------------------- assessments


def check_context(graph: ConceptGraph, alert: ContextSet) -> ContextCheck:
    """Report which of an alert's conditioning contexts never reached the graph."""
    if not graph.defined(alert.alert):
        raise KeyError(f"unknown alert concept {alert.alert}")
    missing = tuple(sorted((c for c in alert.contexts if not graph.defined(c)), key=_key_sort))
    return ContextCheck(not missing, missing)


def is_traceable(graph: ConceptGraph, concept: ConceptKey) -> bool:
    """True when every causal ancestry chain of ``concept`` is complete back
    to a boundary concept: no undefined ancestors, no dangling origins and
    no loops among the ancestors."""
    if concept not in graph.nodes:
        raise KeyError(f"unknown concept {concept}")
    state: dict[ConceptKey, int] = {}  # 1 = on stack, 2 = done

    def visit(key: ConceptKey) -> bool:
        if state.get(key) == 1:
            return False
        if state.get(key) == 2:
            return True
        if not graph.defined(key):
            return False
        if key.namespace == BOUNDARY_NS:
            state[key] = 2
            return True
        preds = graph.predecessors(key)
        if not preds:
            return False
        state[key] = 1
        ok = all(visit(e.source) for e in preds)
        state[key] = 2
        return ok

    return visit(concept)


def is_reversible(graph: ConceptGraph) -> bool:
    """Every forward causal edge needs a declared inverse promise, i.e. an
    opposite FOLLOWS(-) edge.  Histories recorded by journals never carry
    these."""
    for edge in graph.edges.values():
        if edge.relation is Relation.FOLLOWS and edge.sign == "+":
            inverse = graph.edges.get((edge.target, edge.source, Relation.FOLLOWS))
            if inverse is None or inverse.sign != "-":
                return False
    return True

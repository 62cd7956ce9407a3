"""The four spacetime relation types and the surface verbs that map onto them."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Relation(str, enum.Enum):
    CONTAINS = "CONTAINS"
    FOLLOWS = "FOLLOWS"
    EXPRESSES = "EXPRESSES"
    NEAR = "NEAR"


# at most one of these may hold for an ordered pair of concepts
EXCLUSIVE = frozenset({Relation.CONTAINS, Relation.FOLLOWS, Relation.EXPRESSES})

DEFINITE = "definite"
MAY = "may"
CONFIDENCES = (DEFINITE, MAY)

VERBS: dict[str, Relation] = {
    "precedes": Relation.FOLLOWS,
    "may determine": Relation.FOLLOWS,
    "part of": Relation.CONTAINS,
    "contains": Relation.CONTAINS,
    "intent": Relation.EXPRESSES,
    "btw": Relation.EXPRESSES,
    "remarked": Relation.EXPRESSES,
    "attribute": Relation.EXPRESSES,
    "close to": Relation.NEAR,
}


def relation_for(verb: str) -> Relation:
    try:
        return VERBS[verb]
    except KeyError:
        raise ValueError(f"unknown relation verb {verb!r}") from None


def display_verb(relation: Relation, sign: str, confidence: str) -> str:
    """Verb used when rendering an edge of the given type."""
    if relation is Relation.FOLLOWS:
        return "may determine" if confidence == MAY else "precedes"
    if relation is Relation.CONTAINS:
        return "contains" if sign == "+" else "part of"
    if relation is Relation.EXPRESSES:
        return "expresses"
    return "close to"


@dataclass(frozen=True)
class ConceptKey:
    namespace: str
    name: str

    def display(self) -> str:
        if self.namespace in (SIGNPOST_NS, BOUNDARY_NS):
            return self.name
        if self.namespace in UNNAMED_CLASSES:
            return f"[{self.namespace}: : {self.name}]"
        return f"[{self.namespace}: {self.name}]"

    def __str__(self) -> str:
        return self.display()


SIGNPOST_NS = "signpost"
BOUNDARY_NS = "boundary"
PROGRAM_START_KEY = ConceptKey(BOUNDARY_NS, "program start")

# classes whose detail lines carry an empty name slot, e.g. "[intent: : open file X]"
UNNAMED_CLASSES = frozenset({"intent", "remarked"})


@dataclass(frozen=True)
class RelationAnnotation:
    """A typed relation attached to a detail event.

    ``subject`` is the signpost concept the detail hangs off; ``object`` is
    the concept named by the detail.
    """

    relation: Relation
    sign: str
    subject: ConceptKey
    object: ConceptKey
    verb: str
    confidence: str = DEFINITE

    def __post_init__(self):
        if self.sign not in ("+", "-"):
            raise ValueError(f"orientation must be '+' or '-', got {self.sign!r}")
        if self.confidence not in CONFIDENCES:
            raise ValueError(f"unknown confidence {self.confidence!r}")
        if relation_for(self.verb) is not self.relation:
            raise ValueError(f"verb {self.verb!r} does not express {self.relation.value}")

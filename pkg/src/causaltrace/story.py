"""Story extraction from a concept graph.

A story is a walk along FOLLOWS edges.  At each concept the walk may also
step sideways once through a CONTAINS edge (to a generalization or an
instance) and continue along that concept's causal edges, which multiplies
the stories available without letting scope grow unchecked.

Three searches are offered:

* ``retarded``: everything that follows from a start concept,
* ``advanced``: everything leading up to an end concept,
* ``causal``: every path from a start to an end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

from .concept_graph import ConceptEdge, ConceptGraph
from .relations import ConceptKey, Relation, display_verb

ORIGIN = "origin"
CAUSAL = "causal"
GENERALIZATION = "generalization"

MODES = ("retarded", "advanced", "causal")

BEGIN_MARK = "<begin NON-LOCAL CAUSE>"
END_MARK = "<end NON-LOCAL CAUSE>"


@dataclass(frozen=True)
class StoryQuery:
    mode: str
    start: ConceptKey | None = None
    end: ConceptKey | None = None
    max_depth: int = 8
    max_stories: int = 1000
    include_may: bool = True
    generalize: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown search mode {self.mode!r}; expected one of {', '.join(MODES)}")
        if self.mode in ("retarded", "causal") and self.start is None:
            raise ValueError(f"{self.mode} search requires a start concept")
        if self.mode in ("advanced", "causal") and self.end is None:
            raise ValueError(f"{self.mode} search requires an end concept")
        if self.max_depth < 1 or self.max_stories < 1:
            raise ValueError("max_depth and max_stories must be positive")


@dataclass(frozen=True)
class StoryStep:
    concept: ConceptKey
    edge: ConceptEdge | None
    kind: str


@dataclass(frozen=True)
class Story:
    steps: tuple[StoryStep, ...]
    score: float

    @property
    def concepts(self) -> tuple[ConceptKey, ...]:
        return tuple(s.concept for s in self.steps)

    @property
    def causal_hops(self) -> int:
        return sum(1 for s in self.steps if s.kind == CAUSAL)

    def names(self) -> list[str]:
        return [c.display() for c in self.concepts]


def _score(steps: Iterable[StoryStep]) -> float:
    return sum(math.log(s.edge.weight + 1) for s in steps if s.kind == CAUSAL)


def _order_key(story: Story):
    return (-story.score, [(c.namespace, c.name) for c in story.concepts])


def search(graph: ConceptGraph, query: StoryQuery) -> list[Story]:
    for key in (query.start, query.end):
        if key is not None and key not in graph:
            graph.find(key)  # raises with nearest names
    if query.mode == "advanced":
        paths = _walk(graph, query.end, None, query, backward=True)
        paths = [list(reversed(p)) for p in paths]
    else:
        paths = _walk(graph, query.start, query.end, query, backward=False)

    stories = [Story(tuple(steps), _score(steps)) for steps in map(_as_steps, paths)]
    stories.sort(key=_order_key)
    return stories[: query.max_stories]


# A path is a list of (concept, edge-into-it, kind) from the search root
# outward; for backward searches "into" means towards the root.


def _walk(graph, root, goal, query: StoryQuery, backward: bool):
    found: list[list[tuple]] = []
    path: list[tuple] = [(root, None, ORIGIN)]
    on_path = {root}

    def causal_edges(key):
        if backward:
            return [(e.source, e) for e in graph.predecessors(key, query.include_may)]
        return [(e.target, e) for e in graph.successors(key, query.include_may)]

    def moves(key):
        for nxt, edge in causal_edges(key):
            if nxt not in on_path:
                yield [(nxt, edge, CAUSAL)]
        # a sideways step is always followed by a causal one, so at most one
        # generalization hop happens per concept
        if not query.generalize:
            return
        for related, gedge in graph.containment(key):
            if related in on_path:
                continue
            for nxt, edge in causal_edges(related):
                if nxt not in on_path and nxt != related:
                    yield [(related, gedge, GENERALIZATION), (nxt, edge, CAUSAL)]

    def extend(depth):
        key = path[-1][0]
        if goal is not None and key == goal and len(path) > 1:
            found.append(list(path))
            return
        if depth == query.max_depth:
            if goal is None:
                found.append(list(path))
            return
        extended = False
        for move in moves(key):
            extended = True
            for item in move:
                path.append(item)
                on_path.add(item[0])
            extend(depth + 1)
            for item in move:
                path.pop()
                on_path.discard(item[0])
        if not extended and goal is None:
            found.append(list(path))

    if goal is not None and root == goal:
        return [list(path)]
    extend(0)
    return found


def _as_steps(path: list[tuple]) -> list[StoryStep]:
    """Turn a root-outward path into forward story steps.

    For backward walks the path has already been reversed, so each edge is
    attached to the concept that precedes it; shift edges one place so each
    step carries the edge that reaches it.
    """
    if path and path[0][2] == ORIGIN:
        return [StoryStep(c, e, k) for c, e, k in path]
    concepts = [c for c, _, _ in path]
    links = [(e, k) for _, e, k in path[:-1]]
    steps = [StoryStep(concepts[0], None, ORIGIN)]
    for concept, (edge, kind) in zip(concepts[1:], links):
        steps.append(StoryStep(concept, edge, kind))
    return steps


def detect_loops(graph: ConceptGraph, max_depth: int | None = None) -> list[tuple[ConceptKey, ...]]:
    """All elementary cycles along causal edges, each starting from its
    smallest concept.  ``may determine`` edges count as causal here."""
    order = sorted(graph.nodes, key=lambda k: (k.namespace, k.name))
    rank = {k: i for i, k in enumerate(order)}
    cycles = []

    for start in order:
        stack = [start]

        def dfs(key):
            for edge in graph.successors(key):
                nxt = edge.target
                if nxt == start:
                    cycles.append(tuple(stack))
                elif rank[nxt] > rank[start] and nxt not in stack:
                    if max_depth is None or len(stack) < max_depth:
                        stack.append(nxt)
                        dfs(nxt)
                        stack.pop()

        dfs(start)
    return cycles


def rank_paths(stories: list[Story], visit_counts: Mapping[tuple[ConceptKey, ConceptKey], float]) -> list[Story]:
    """Favour classical paths: stable re-sort by the total observed
    frequency of each story's causal transitions."""

    def total(story: Story) -> float:
        return sum(
            visit_counts.get((s.edge.source, s.edge.target), 0)
            for s in story.steps
            if s.kind == CAUSAL
        )

    return sorted(stories, key=total, reverse=True)


def edge_counts(graph: ConceptGraph) -> dict[tuple[ConceptKey, ConceptKey], int]:
    """Transition frequencies as recorded by the graph's edge weights."""
    return {
        (e.source, e.target): e.weight
        for e in graph.edges.values()
        if e.relation is Relation.FOLLOWS
    }


def render_edge(edge: ConceptEdge, reverse: bool = False) -> str:
    source, target = (edge.target, edge.source) if reverse else (edge.source, edge.target)
    verb = display_verb(edge.relation, edge.sign, edge.confidence)
    if reverse and edge.relation is Relation.CONTAINS:
        verb = display_verb(edge.relation, "-" if edge.sign == "+" else "+", edge.confidence)
    return f"({source.display()}) --b({verb})--> \"{target.display()}\""


def render_map(graph: ConceptGraph, stories: Iterable[Story]) -> str:
    """Map text for the edges walked by ``stories``, indented by causal
    depth; repeated lines are printed once."""
    lines = [BEGIN_MARK]
    seen = set()
    for story in stories:
        depth = 0
        for prev, step in zip(story.steps, story.steps[1:]):
            edge = step.edge
            if edge.key not in graph.edges:
                raise ValueError(f"story uses an edge not in the graph: {render_edge(edge)}")
            # containment hops may run against the edge's own direction
            line = "  " * depth + render_edge(edge, reverse=edge.source != prev.concept)
            if line not in seen:
                seen.add(line)
                lines.append(line)
            if step.kind == CAUSAL:
                depth += 1
    lines.append(END_MARK)
    return "\n".join(lines) + "\n"


def story_records(stories: Iterable[Story]) -> str:
    """One tab-separated record per story step:
    ``story step kind concept via-verb score``."""
    out = []
    for i, story in enumerate(stories):
        for j, step in enumerate(story.steps):
            verb = "-" if step.edge is None else display_verb(step.edge.relation, step.edge.sign, step.edge.confidence)
            out.append(f"{i}\t{j}\t{step.kind}\t{step.concept.display()}\t{verb}\t{story.score:.6f}")
    return "".join(line + "\n" for line in out)

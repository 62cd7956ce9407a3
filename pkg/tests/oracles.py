"""Brute-force reference implementations used to check the fast paths."""

from __future__ import annotations

import itertools
import math

import numpy as np

from causaltrace.concept_graph import ConceptGraph
from causaltrace.relations import MAY, ConceptKey, Relation


def random_dag(seed: int, n_nodes: int | None = None, p: float = 0.4, containment: bool = False) -> ConceptGraph:
    """Random causal DAG on nodes n0..n{k-1}; edges only run from lower to
    higher index.  Some edges are weighted or marked 'may'; with
    ``containment`` a few CONTAINS edges are sprinkled in as well."""
    rng = np.random.default_rng(seed)
    n = int(n_nodes if n_nodes is not None else rng.integers(2, 9))
    keys = [ConceptKey("signpost", f"n{i}") for i in range(n)]
    g = ConceptGraph()
    for k in keys:
        g.observe(k)
    for i, j in itertools.combinations(range(n), 2):
        r = rng.random()
        if r < p:
            conf = MAY if rng.random() < 0.25 else "definite"
            for w in range(int(rng.integers(1, 4))):
                g.add_edge(keys[i], keys[j], Relation.FOLLOWS, confidence=conf, label=("j", w))
        elif containment and r < p + 0.15:
            a, b = (i, j) if rng.random() < 0.5 else (j, i)
            g.add_edge(keys[a], keys[b], Relation.CONTAINS, "+" if rng.random() < 0.5 else "-")
    return g


def _moves(graph: ConceptGraph, a: ConceptKey, b: ConceptKey, include_may: bool):
    """Every labelled single transition a -> b."""
    out = []
    e = graph.edges.get((a, b, Relation.FOLLOWS))
    if e is not None and e.sign == "+" and (include_may or e.confidence != MAY):
        out.append(("causal", e))
    for key in ((a, b, Relation.CONTAINS), (b, a, Relation.CONTAINS)):
        e = graph.edges.get(key)
        if e is not None:
            out.append(("generalization", e))
    return out


def causal_stories(graph: ConceptGraph, start, goal, max_depth: int, include_may=True, generalize=True):
    """All (concepts, kinds, score) triples for start->goal stories, by
    enumerating every ordering of every subset of intermediate nodes."""
    middle = [k for k in graph.nodes if k not in (start, goal)]
    found = []
    for size in range(len(middle) + 1):
        for inner in itertools.permutations(middle, size):
            seq = (start, *inner, goal)
            options = [_moves(graph, a, b, include_may) for a, b in zip(seq, seq[1:])]
            for choice in itertools.product(*options):
                kinds = [k for k, _ in choice]
                if not generalize and "generalization" in kinds:
                    continue
                if kinds[-1] != "causal":
                    continue
                if any(k == "generalization" and nxt != "causal" for k, nxt in zip(kinds, kinds[1:])):
                    continue
                if kinds.count("causal") > max_depth:
                    continue
                score = sum(math.log(e.weight + 1) for k, e in choice if k == "causal")
                found.append((seq, ("origin", *kinds), round(score, 9)))
    return sorted(found, key=_canon)


def _canon(item):
    seq, kinds, score = item
    return (-score, [(c.namespace, c.name) for c in seq], kinds)


def as_triples(stories):
    return sorted(
        ((s.concepts, tuple(step.kind for step in s.steps), round(s.score, 9)) for s in stories),
        key=_canon,
    )


def autocorrelation(values) -> np.ndarray:
    """Direct O(n^2) normalized autocorrelation."""
    x = np.asarray(values, dtype=float)
    x = x - x.mean()
    denom = float(x @ x)
    n = x.size
    return np.array([float(x[: n - k] @ x[k:]) / denom for k in range(n)])


def first_crossing(r: np.ndarray, threshold: float = 1 / math.e) -> int:
    for lag in range(1, r.size):
        if r[lag] < threshold:
            return lag
    raise ValueError("no crossing")


def entropy_bits(p) -> float:
    return -sum(x * math.log2(x) for x in p if x > 0)

import math

import pytest
from hypothesis import given, settings, strategies as st

from oracles import as_triples, causal_stories, random_dag

from causaltrace.concept_graph import ConceptGraph
from causaltrace.relations import ConceptKey, Relation
from causaltrace.story import (
    BEGIN_MARK,
    END_MARK,
    StoryQuery,
    detect_loops,
    edge_counts,
    rank_paths,
    render_edge,
    render_map,
    search,
    story_records,
)


def sp(name):
    return ConceptKey("signpost", name)


def test_query_validation():
    with pytest.raises(ValueError, match="unknown search mode"):
        StoryQuery("sideways", sp("a"))
    with pytest.raises(ValueError, match="requires a start"):
        StoryQuery("retarded")
    with pytest.raises(ValueError, match="requires an end"):
        StoryQuery("causal", sp("a"))


def test_unknown_concept(demo_graph):
    with pytest.raises(KeyError, match="nearest"):
        search(demo_graph, StoryQuery("retarded", sp("MainLoop strat")))


def test_demo_causal_chain(demo_graph):
    q = StoryQuery("causal", demo_graph.find("MainLoop start"), demo_graph.find("The end!"))
    stories = search(demo_graph, q)
    assert [s.names() for s in stories] == [
        ["MainLoop start", "Beginning of test code", "code signpost X", "Commence testing", "The end!"]
    ]


def test_demo_retarded_map(demo_graph):
    text = render_map(demo_graph, search(demo_graph, StoryQuery("retarded", demo_graph.find("program start"))))
    lines = text.splitlines()
    assert lines[0] == BEGIN_MARK and lines[-1] == END_MARK
    assert '(program start) --b(precedes)--> "MainLoop start"' in lines
    assert any(
        line.strip() == '(code signpost X) --b(may determine)--> "[dns lookup: 123.456.789.123]"' for line in lines
    )
    assert len(lines) == len(set(lines))


def test_advanced_search_follows_may_edges(demo_graph):
    target = demo_graph.find("[file: file://URI]")
    with_may = search(demo_graph, StoryQuery("advanced", end=target))
    assert any("TEST1---------" in s.names() for s in with_may)
    assert all(s.concepts[-1] == target for s in with_may)
    without = search(demo_graph, StoryQuery("advanced", end=target, include_may=False))
    # nothing definite leads there, so only the bare end concept remains
    assert [s.names() for s in without] == [["[file: file://URI]"]]


def test_generalization_hop():
    g = ConceptGraph()
    g.add_edge(sp("a"), sp("b"), Relation.FOLLOWS)
    g.add_edge(sp("b"), ConceptKey("cls", "B"), Relation.CONTAINS, "-")
    g.add_edge(ConceptKey("cls", "B"), sp("c"), Relation.FOLLOWS)
    stories = search(g, StoryQuery("causal", sp("a"), sp("c")))
    assert [[st.kind for st in s.steps] for s in stories] == [["origin", "causal", "generalization", "causal"]]
    assert search(g, StoryQuery("causal", sp("a"), sp("c"), generalize=False)) == []
    text = render_map(g, stories)
    # the containment hop is rendered from the concept the story stands on
    assert '  (b) --b(part of)--> "[cls: B]"' in text


def test_two_generalization_hops_in_a_row_are_not_allowed():
    g = ConceptGraph()
    g.add_edge(sp("a"), ConceptKey("cls", "A"), Relation.CONTAINS, "-")
    g.add_edge(ConceptKey("cls", "A"), ConceptKey("cls", "top"), Relation.CONTAINS, "-")
    g.add_edge(ConceptKey("cls", "top"), sp("z"), Relation.FOLLOWS)
    assert search(g, StoryQuery("causal", sp("a"), sp("z"))) == []


def test_scores_and_order():
    g = ConceptGraph()
    for i in range(3):
        g.add_edge(sp("a"), sp("b"), Relation.FOLLOWS, label=("j", i))
    g.add_edge(sp("a"), sp("c"), Relation.FOLLOWS)
    stories = search(g, StoryQuery("retarded", sp("a")))
    assert [s.names() for s in stories] == [["a", "b"], ["a", "c"]]
    assert stories[0].score == pytest.approx(math.log(4))


def test_max_stories_and_depth(demo_graph):
    q = StoryQuery("retarded", demo_graph.find("program start"), max_depth=4, max_stories=3)
    stories = search(demo_graph, q)
    assert len(stories) == 3
    assert all(s.causal_hops <= 4 for s in stories)
    deep = search(demo_graph, StoryQuery("retarded", demo_graph.find("program start"), max_depth=4))
    assert len(deep) > 3 and stories == deep[:3]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.booleans(), st.booleans())
def test_matches_brute_force_with_containment(seed, depth, may, gen):
    g = random_dag(seed, n_nodes=6, containment=True)
    keys = sorted(g.nodes, key=lambda k: k.name)
    start, goal = keys[0], keys[-1]
    got = search(g, StoryQuery("causal", start, goal, depth, 10**6, include_may=may, generalize=gen))
    assert as_triples(got) == causal_stories(g, start, goal, depth, may, gen)
    scores = [s.score for s in got]
    assert scores == sorted(scores, reverse=True)


def test_loops():
    g = ConceptGraph()
    g.add_edge(sp("a"), sp("b"), Relation.FOLLOWS)
    g.add_edge(sp("b"), sp("c"), Relation.FOLLOWS)
    g.add_edge(sp("c"), sp("a"), Relation.FOLLOWS)
    g.add_edge(sp("b"), sp("a"), Relation.FOLLOWS)
    loops = detect_loops(g)
    assert sorted(tuple(k.name for k in c) for c in loops) == [("a", "b"), ("a", "b", "c")]
    assert detect_loops(g, max_depth=2) == [(sp("a"), sp("b"))]


def test_demo_has_no_loops(demo_graph):
    assert detect_loops(demo_graph) == []


def test_rank_paths_prefers_frequent_transitions():
    g = ConceptGraph()
    g.add_edge(sp("a"), sp("b"), Relation.FOLLOWS)
    g.add_edge(sp("a"), sp("c"), Relation.FOLLOWS)
    stories = search(g, StoryQuery("retarded", sp("a")))
    assert [s.names()[-1] for s in stories] == ["b", "c"]
    ranked = rank_paths(stories, {(sp("a"), sp("c")): 10})
    assert [s.names()[-1] for s in ranked] == ["c", "b"]
    assert rank_paths(stories, edge_counts(g)) == stories


def test_records_and_edge_rendering(demo_graph):
    q = StoryQuery("causal", demo_graph.find("Commence testing"), demo_graph.find("The end!"))
    records = story_records(search(demo_graph, q)).splitlines()
    assert records[0].split("\t")[:5] == ["0", "0", "origin", "Commence testing", "-"]
    assert records[1].split("\t")[2:5] == ["causal", "The end!", "precedes"]
    edge = demo_graph.edges[(demo_graph.find("MainLoop start"), demo_graph.find("[function: main]"), Relation.CONTAINS)]
    assert render_edge(edge) == '(MainLoop start) --b(part of)--> "[function: main]"'
    assert render_edge(edge, reverse=True) == '([function: main]) --b(contains)--> "MainLoop start"'

"""
Signposts, concept maps and stories
===================================

Instrument a small program with signposts, read back its timeline, fold the
journal into a concept graph and ask the graph for causal stories.
"""

from causaltrace.concept_graph import build_graph, is_reversible, is_traceable
from causaltrace.demo import run_demo
from causaltrace.journal import render_timeline
from causaltrace.story import StoryQuery, detect_loops, render_map, search

# the demo replays a main loop that forks two coroutines, one of which
# forks again; fixed timestamps keep the output reproducible
tracer = run_demo(fixed_timestamps=True)
print(render_timeline(tracer.journal))

# every signpost points back to the one before it on its own lane
for number in (5, 8, 10):
    print(number, "<-", tracer.journal.back_chain(number)[1:])

graph, reports = build_graph([tracer.journal])
print(f"{len(graph.nodes)} concepts, {len(graph.edges)} edges, violations: {sum(len(r.errors) for r in reports)}")

# everything downstream of the program start, as a map
print(render_map(graph, search(graph, StoryQuery("retarded", graph.find("program start"), max_depth=4))))

# one start and one end pin the story down
chain = search(graph, StoryQuery("causal", graph.find("MainLoop start"), graph.find("The end!")))
print(" -> ".join(chain[0].names()))

# what could have led to the missing file?  'may determine' edges count as
# potential causes unless excluded
target = graph.find("[file: file://URI]")
for include_may in (True, False):
    stories = search(graph, StoryQuery("advanced", end=target, include_may=include_may))
    print(f"include_may={include_may}:", [s.names()[-2] if len(s.steps) > 1 else "(none)" for s in stories])

# histories are traceable but cannot be run backwards
print("traceable:", is_traceable(graph, graph.find("The end!")))
print("reversible:", is_reversible(graph))
print("loops:", detect_loops(graph))

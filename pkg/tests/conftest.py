from __future__ import annotations

import pathlib

import pytest
from hypothesis import strategies as st

from causaltrace.concept_graph import build_graph
from causaltrace.demo import run_demo
from causaltrace.signpost import Tracer

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def demo_tracer():
    return run_demo(fixed_timestamps=True)


@pytest.fixture
def demo_graph(demo_tracer):
    graph, reports = build_graph([demo_tracer.journal])
    assert all(r.ok for r in reports)
    return graph


NAMES = st.sampled_from(["alpha", "beta", "gamma", "delta", "eps"])
NAMESPACES = st.sampled_from(["file", "host", "module"])

# a script is a list of steps: ("sign", name, lane_choice) opens a signpost,
# ("fork", lane_choice) forks a lane, ("rel"/"part"/"note", name, ns) annotates
STEP = st.one_of(
    st.tuples(st.just("sign"), NAMES, st.integers(0, 3)),
    st.tuples(st.just("fork"), st.integers(0, 3)),
    st.tuples(st.sampled_from(["rel", "part", "note", "attr"]), NAMES, NAMESPACES),
)
SCRIPTS = st.lists(STEP, min_size=1, max_size=25)


def play(script, name: str = "gen", pid: str = "1") -> Tracer:
    """Replay a generated script; steps that would be invalid are skipped."""
    t = Tracer(name, pid, timestamps=None)
    lanes = ["main"]
    handles = {}
    for step in script:
        kind = step[0]
        if kind == "sign":
            lane = lanes[step[2] % len(lanes)]
            handles[lane] = t.signpost(f"sp {step[1]}", lane=lane)
        elif kind == "fork":
            lanes.append(t.fork(lanes[step[1] % len(lanes)]))
        else:
            live = [h for h in handles.values() if not h.closed]
            if not live:
                continue
            h = live[-1]
            _, text, ns = step
            if kind == "rel":
                h.relies_on(text, ns)
            elif kind == "part":
                h.part_of(text, ns + "-scope")
            elif kind == "note":
                h.note(text)
            else:
                h.attribute(text, ns + "-attr")
    return t


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)

"""Causal-history tracing: proper-time signpost journals, concept graphs of
typed spacetime relations, story search, and simulations of how ordering,
coupling and category information survive aggregation."""

from .proper_time import ProcessClock, LaneState, TimestampContext, new_clock
from .journal import Event, EventKind, FormatIntern, Journal, JournalError, distance, read_journal, render_timeline, write_journal
from .relations import ConceptKey, Relation, RelationAnnotation
from .signpost import SignpostError, SignpostHandle, Tracer
from .concept_graph import (
    ConceptGraph,
    ContextSet,
    IncompatibleRelation,
    PromiseRecord,
    build_graph,
    check_context,
    ingest,
    is_reversible,
    is_traceable,
    observable,
)
from .story import Story, StoryQuery, detect_loops, rank_paths, render_map, search
from .channel_sim import ChannelConfig, run_coupling_experiment, run_order_experiment, run_push_pull, sample_series
from .metrics import BucketSeries, CategorizedStream, mixing_entropy, recommend_sampling, significance

__version__ = "0.1.0"

"""Command-line entry point: ``causaltrace <verb> ...``.

Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 invariant
violation detected.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Sequence

import numpy as np

from . import channel_sim as sim
from . import metrics
from .concept_graph import (
    ConceptGraph,
    ContextSet,
    GraphFormatError,
    PromiseRecord,
    build_graph,
    check_context,
    is_reversible,
    is_traceable,
    observable,
)
from .demo import run_demo
from .relations import SIGNPOST_NS, ConceptKey
from .journal import JournalError, distance, read_journal, render_timeline, write_journal
from .story import StoryQuery, detect_loops, edge_counts, rank_paths, render_map, search, story_records

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _report(out, fields: dict, as_csv: bool) -> None:
    if as_csv:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(list(fields))
        writer.writerow([_fmt(v) for v in fields.values()])
    else:
        for key, value in fields.items():
            out.write(f"{key}: {_fmt(value)}\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        return "inf" if math.isinf(value) else f"{value:.6g}"
    return str(value)


# ---------------------------------------------------------------- commands


def cmd_demo(args, out) -> int:
    tracer = run_demo(fixed_timestamps=args.seedless_timestamps)
    try:
        write_journal(tracer.journal, args.output)
    except OSError as exc:
        raise InputError(f"cannot write {args.output}: {exc.strerror or exc}") from None
    out.write(f"wrote {len(tracer.journal)} events to {args.output}\n")
    return EXIT_OK


def _load_journal(path):
    try:
        return read_journal(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except JournalError as exc:
        raise InputError(str(exc)) from None


def cmd_render(args, out) -> int:
    journal = _load_journal(args.journal)
    if args.distance:
        try:
            out.write(f"{distance(journal, *args.distance)}\n")
        except IndexError as exc:
            raise InputError(str(exc)) from None
        return EXIT_OK
    out.write(render_timeline(journal))
    return EXIT_OK


def _load_graph(path) -> ConceptGraph:
    try:
        return ConceptGraph.load(path)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except (GraphFormatError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _graph_for(args) -> ConceptGraph:
    if getattr(args, "graph", None):
        return _load_graph(args.graph)
    if getattr(args, "journal", None):
        graph, _ = build_graph(_load_journal(p) for p in args.journal)
        return graph
    graph, _ = build_graph([run_demo(fixed_timestamps=True).journal])
    return graph


def _concept(graph: ConceptGraph, name: str):
    try:
        return graph.find(name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None


def cmd_concepts(args, out) -> int:
    if args.action == "build":
        graph, reports = build_graph(_load_journal(p) for p in args.journals)
        text = graph.dumps()
        if args.output:
            graph.save(args.output)
        else:
            out.write(text)
        errors = [f"{r.journal}: {e}" for r in reports for e in r.errors]
        for line in errors:
            sys.stderr.write(f"selection rule violation: {line}\n")
        if args.output:
            out.write(f"concepts: {len(graph.nodes)}\nedges: {len(graph.edges)}\nviolations: {len(errors)}\n")
        return EXIT_INVARIANT if errors else EXIT_OK

    if args.action == "observable":
        offer = PromiseRecord(args.giver, args.receiver, "+", _set(args.offer)) if args.offer is not None else None
        accept = PromiseRecord(args.receiver, args.giver, "-", _set(args.accept)) if args.accept is not None else None
        result = observable(offer, accept)
        _report(out, {"observable": result.observable, "overlap": ",".join(sorted(result.overlap))}, False)
        return EXIT_OK

    graph = _graph_for(args)
    if args.action == "traceable":
        concept = _concept(graph, args.concept)
        _report(out, {"concept": concept.display(), "traceable": is_traceable(graph, concept)}, False)
    elif args.action == "reversible":
        _report(out, {"reversible": is_reversible(graph)}, False)
    elif args.action == "context":
        alert = _concept(graph, args.alert)
        contexts = []
        for c in args.context:
            try:
                contexts.append(graph.find(c))
            except KeyError:
                ns, sep, name = c.partition(":")
                contexts.append(ConceptKey(ns.strip(), name.strip()) if sep else ConceptKey(SIGNPOST_NS, c))
        check = check_context(graph, ContextSet(alert, frozenset(contexts)))
        status = "complete" if check.complete else "lost"
        _report(out, {"context": status, "missing": "; ".join(k.display() for k in check.missing)}, False)
        return EXIT_OK if check.complete else EXIT_INVARIANT
    return EXIT_OK


def _set(text: str) -> frozenset[str]:
    return frozenset(t.strip() for t in text.split(",") if t.strip())


def cmd_story(args, out) -> int:
    graph = _graph_for(args)
    if args.loops:
        for cycle in detect_loops(graph, args.max_depth):
            out.write(" -> ".join(k.display() for k in cycle + cycle[:1]) + "\n")
        return EXIT_OK
    if not args.mode:
        raise UsageError("story: --mode is required unless --loops is given")
    start = _concept(graph, args.start) if args.start else None
    end = _concept(graph, args.end) if args.end else None
    try:
        query = StoryQuery(
            args.mode, start, end, args.max_depth, args.max_stories,
            include_may=not args.no_may, generalize=not args.no_generalize,
        )
    except ValueError as exc:
        raise UsageError(f"story: {exc}") from None
    stories = search(graph, query)
    if args.classical:
        stories = rank_paths(stories, edge_counts(graph))
    out.write(story_records(stories) if args.records else render_map(graph, stories))
    return EXIT_OK


def cmd_sim(args, out) -> int:
    if args.experiment == "order":
        config = sim.ChannelConfig(
            reliability=args.reliability, latency_min=args.latency_min,
            latency_width=args.latency_width, drop_probability=args.drop, seed=args.seed,
        )
        report = sim.run_order_experiment(config, args.n)
        fields = report.as_dict()
    elif args.experiment == "coupling":
        duration = args.duration or math.ceil(100 * args.n * 10 / args.rate)
        try:
            fields = sim.run_coupling_experiment(args.rate, args.n, duration, seed=args.seed).as_dict()
        except ValueError as exc:
            raise UsageError(f"sim coupling: {exc}") from None
    elif args.experiment == "pushpull":
        config = sim.ChannelConfig(mode=args.mode, seed=args.seed)
        bursts = sim.poisson_bursts(args.rate, args.duration, seed=args.seed)
        fields = sim.run_push_pull(config, bursts, args.service_rate, args.queue_limit, args.quota).as_dict()
    else:
        series = sim.square_wave(args.period, args.length)
        sampled = sim.sample_series(series, args.interval)
        fields = {
            "period": args.period,
            "interval": args.interval,
            "samples": len(sampled),
            "missed_transitions": metrics.missed_transitions(series, args.interval),
        }
    _report(out, fields, args.csv)
    return EXIT_OK


def cmd_metrics(args, out) -> int:
    if args.analysis == "entropy":
        if args.counts:
            try:
                counts = [int(c) for c in args.counts.split(",")]
            except ValueError:
                raise UsageError("metrics entropy: --counts takes comma-separated integers") from None
        else:
            counts = [1] * args.alphabet
        alphabet = [f"c{i}" for i in range(len(counts))]
        stream = metrics.CategorizedStream.from_counts(dict(zip(alphabet, counts)))
        try:
            report = metrics.mixing_entropy(stream, labelled=not args.unlabelled)
        except ValueError as exc:
            raise UsageError(f"metrics entropy: {exc}") from None
        fields = {
            "alphabet": len(alphabet),
            "labelled": not args.unlabelled,
            "S_ent_bits": report.S_ent,
            "max_bits": report.max_possible,
            "significance": metrics.significance(report),
        }
        if report.source_entropy is not None:
            fields["source_entropy_bits"] = report.source_entropy
    elif args.analysis == "sampling":
        if args.input:
            try:
                values = metrics.read_series_csv(args.input)
            except OSError as exc:
                raise InputError(f"{args.input}: {exc.strerror or exc}") from None
            except ValueError as exc:
                raise InputError(str(exc)) from None
        else:
            t = np.arange(args.length)
            values = np.sin(2 * np.pi * t / args.sine)
        try:
            advice = metrics.recommend_sampling(metrics.SampleSeries(values, args.spacing))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        fields = {"autocorr_time": advice.autocorr_time, "recommended_interval": advice.recommended_interval}
    else:
        try:
            series = metrics.BucketSeries(args.period, args.width, args.decay)
        except ValueError as exc:
            raise UsageError(f"metrics buckets: {exc}") from None
        if args.state:
            try:
                series = metrics.BucketSeries.load(args.state)
            except FileNotFoundError:
                pass
            except ValueError as exc:
                raise InputError(f"{args.state}: {exc}") from None
        changed = 0
        try:
            with open(args.input, newline="") as fh:
                for lineno, row in enumerate(csv.reader(fh), start=1):
                    if not row:
                        continue
                    try:
                        ts, value = float(row[0]), float(row[1])
                    except (ValueError, IndexError):
                        if lineno == 1:
                            continue
                        raise InputError(f"{args.input}:{lineno}: expected timestamp,value") from None
                    label = row[2] if len(row) > 2 else None
                    changed += series.update(ts, value, label)
        except OSError as exc:
            raise InputError(f"{args.input}: {exc.strerror or exc}") from None
        if args.state:
            series.save(args.state)
        filled = int(np.count_nonzero(series.weights()))
        fields = {"buckets": len(series), "filled": filled, "applied": changed}
    _report(out, fields, args.csv)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="causaltrace", description="Causal-history tracing toolkit")
    verbs = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    d = verbs.add_parser("demo", help="run the instrumented demo program and write its journal")
    d.add_argument("--output", required=True)
    d.add_argument("--seedless-timestamps", action="store_true", help="use a fixed timestamp context")
    d.set_defaults(func=cmd_demo)

    r = verbs.add_parser("render", help="print a journal as a timeline")
    r.add_argument("journal")
    r.add_argument("--distance", nargs=2, type=int, metavar=("LINE_A", "LINE_B"))
    r.set_defaults(func=cmd_render)

    c = verbs.add_parser("concepts", help="build and inspect concept graphs")
    actions = c.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = actions.add_parser("build")
    b.add_argument("journals", nargs="+")
    b.add_argument("--output")
    for name in ("traceable", "reversible", "context"):
        a = actions.add_parser(name)
        a.add_argument("--graph")
        a.add_argument("--journal", action="append")
        if name == "traceable":
            a.add_argument("--concept", required=True)
        if name == "context":
            a.add_argument("--alert", required=True)
            a.add_argument("--context", action="append", default=[])
    o = actions.add_parser("observable")
    o.add_argument("--giver", default="S")
    o.add_argument("--receiver", default="R")
    o.add_argument("--offer", help="comma-separated values promised (+)")
    o.add_argument("--accept", help="comma-separated values accepted (-)")
    c.set_defaults(func=cmd_concepts)

    s = verbs.add_parser("story", help="search the concept graph for stories")
    s.add_argument("--graph")
    s.add_argument("--journal", action="append")
    s.add_argument("--mode", choices=["retarded", "advanced", "causal"])
    s.add_argument("--from", dest="start")
    s.add_argument("--to", dest="end")
    s.add_argument("--max-depth", type=int, default=8)
    s.add_argument("--max-stories", type=int, default=1000)
    s.add_argument("--no-may", action="store_true", help="ignore 'may determine' edges")
    s.add_argument("--no-generalize", action="store_true")
    s.add_argument("--classical", action="store_true", help="rank by observed transition frequency")
    s.add_argument("--records", action="store_true", help="one step per line instead of a map")
    s.add_argument("--loops", action="store_true", help="list causal loops instead")
    s.set_defaults(func=cmd_story)

    m = verbs.add_parser("sim", help="run channel simulations")
    experiments = m.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    so = experiments.add_parser("order")
    so.add_argument("--reliability", choices=["reliable", "unreliable"], default="unreliable")
    so.add_argument("--latency-min", type=int, default=0)
    so.add_argument("--latency-width", type=int, default=10)
    so.add_argument("--drop", type=float, default=0.0)
    so.add_argument("--n", type=int, default=100)
    sc = experiments.add_parser("coupling")
    sc.add_argument("--n", type=int, default=10, help="events aggregated per assessment")
    sc.add_argument("--rate", type=float, default=1.0)
    sc.add_argument("--duration", type=int)
    sp = experiments.add_parser("pushpull")
    sp.add_argument("--mode", choices=["push", "pull"], default="push")
    sp.add_argument("--rate", type=float, default=0.5)
    sp.add_argument("--service-rate", type=float, default=1.0)
    sp.add_argument("--queue-limit", type=int)
    sp.add_argument("--quota", type=int, default=1)
    sp.add_argument("--duration", type=int, default=1000)
    ss = experiments.add_parser("sample")
    ss.add_argument("--period", type=int, default=8)
    ss.add_argument("--interval", type=int, default=4)
    ss.add_argument("--length", type=int, default=256)
    for e in (so, sc, sp, ss):
        e.add_argument("--seed", type=int, default=sim.DEFAULT_SEED)
        e.add_argument("--csv", action="store_true")
    m.set_defaults(func=cmd_sim)

    x = verbs.add_parser("metrics", help="entropy, sampling and bucket analyses")
    analyses = x.add_subparsers(dest="analysis", required=True, parser_class=_Parser)
    xe = analyses.add_parser("entropy")
    xe.add_argument("--alphabet", type=int, default=4)
    xe.add_argument("--counts", help="items per category, e.g. 2,1,1")
    group = xe.add_mutually_exclusive_group()
    group.add_argument("--unlabelled", action="store_true")
    group.add_argument("--labelled", action="store_true")
    xs = analyses.add_parser("sampling")
    xs.add_argument("--input", help="CSV series (last column)")
    xs.add_argument("--sine", type=int, default=64, help="period of a synthetic sine when no input")
    xs.add_argument("--length", type=int, default=2048)
    xs.add_argument("--spacing", type=int, default=1)
    xb = analyses.add_parser("buckets")
    xb.add_argument("--input", required=True, help="CSV of timestamp,value[,label]")
    xb.add_argument("--period", type=int, default=metrics.WEEK)
    xb.add_argument("--width", type=int, default=metrics.FIVE_MINUTES)
    xb.add_argument("--decay", default="3/5")
    xb.add_argument("--state", help="bucket state file to update in place")
    for e in (xe, xs, xb):
        e.add_argument("--csv", action="store_true")
    x.set_defaults(func=cmd_metrics)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Invoke the CLI in-process and capture standard output."""
    buf = io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())

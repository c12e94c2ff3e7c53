"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 unreadable or invalid input
(including disconnected queries), 3 row limit exceeded, 4 workload
generation failed, 5 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .bench import ablation, run_match, sweep_labels, sweep_query_size
from .errors import (
    BudgetExceededError,
    DisconnectedQueryError,
    GenerationError,
    GraphParseError,
    ResourceLimitError,
)
from .generate import assign_powerlaw_labels, random_walk_query
from .graph import CsrGraph, load_edge_list, load_labels, load_matrix_market, write_edge_list, write_labels
from .matcher import DEFAULT_MAX_ROWS, MatchConfig
from .oracle import DEFAULT_BUDGET, brute_force_match

log = logging.getLogger("gsmatch")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_RESOURCE = 3
EXIT_GENERATION = 4
EXIT_BUDGET = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def read_graph(path, labels_path=None) -> CsrGraph:
    path = Path(path)
    try:
        if path.suffix == ".mtx":
            with path.open() as fh:
                graph = load_matrix_market(fh)
            if labels_path:
                with open(labels_path) as fh:
                    graph = graph.with_labels(load_labels(fh, graph.num_nodes))
            return graph
        with path.open() as fh:
            if labels_path:
                with open(labels_path) as lh:
                    return load_edge_list(fh, lh)
            return load_edge_list(fh)
    except OSError as exc:
        raise GraphParseError(f"cannot read {exc.filename}: {exc.strerror}") from None
    except GraphParseError as exc:
        raise GraphParseError(f"{path}: {exc}") from None


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _range(text):
    """``a:b:step`` (inclusive) or a comma list."""
    if ":" in text:
        parts = [int(x) for x in text.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop + 1, step))
    return [int(x) for x in text.split(",") if x]


def _add_match_flags(p):
    p.add_argument("--refine-rounds", type=_positive, default=2)
    p.add_argument("--lookahead", type=int, choices=(0, 1, 2), default=2)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--max-rows", type=_positive, default=DEFAULT_MAX_ROWS)


def _config(args, enumerate_=False) -> MatchConfig:
    return MatchConfig(
        refine_rounds=args.refine_rounds,
        lookahead_depth=args.lookahead,
        enumerate=enumerate_,
        max_rows=args.max_rows,
        workers=args.workers,
    )


def _emit(doc, args, text_lines):
    if args.output == "json":
        print(json.dumps(doc, indent=2))
    else:
        print("\n".join(text_lines))


def cmd_match(args):
    data = read_graph(args.data, args.labels)
    query = read_graph(args.query, args.query_labels)
    rec = run_match(data, query, _config(args, args.enumerate), str(args.data), str(args.query))
    lines = [
        f"data:   {args.data} ({data.num_nodes} nodes, {data.num_edges} edges)",
        f"query:  {args.query} ({query.num_nodes} nodes, {query.num_edges} edges)",
        f"count:  {rec.count}",
        f"rows:   {' '.join(map(str, rec.rows['post_compaction']))} "
        f"(advanced {sum(rec.rows['pre_compaction'])})",
        f"time:   {rec.wall_ms:.2f} ms",
    ]
    if rec.matches is not None:
        lines += [" ".join(map(str, m)) for m in rec.matches]
    _emit(rec.to_json(), args, lines)
    return rec


def cmd_oracle(args):
    data = read_graph(args.data, args.labels)
    query = read_graph(args.query, args.query_labels)
    t0 = time.perf_counter()
    result = brute_force_match(data, query, budget=args.budget)
    wall = (time.perf_counter() - t0) * 1e3
    doc = {"dataset": str(args.data), "query": str(args.query), "count": result.count,
           "automorphisms": len(result.automorphisms), "wall_ms": wall}
    lines = [f"oracle count: {result.count} (|Aut| = {len(result.automorphisms)})"]
    if args.compare:
        rec = run_match(data, query, _config(args))
        doc["matcher_count"] = rec.count
        doc["agreement"] = rec.count == result.count
        lines.append(f"matcher count: {rec.count}  agreement: {str(doc['agreement']).lower()}")
    _emit(doc, args, lines)
    return doc


def _write(path, writer, graph):
    if path in (None, "-"):
        writer(graph, sys.stdout)
    else:
        with open(path, "w") as fh:
            writer(graph, fh)


def cmd_gen(args):
    data = read_graph(args.data, args.labels)
    if args.what == "labels":
        labeled = assign_powerlaw_labels(data, args.count, seed=args.seed)
        _write(args.out, write_labels, labeled)
        return labeled
    try:
        query = random_walk_query(data, args.nodes, args.edges, seed=args.seed)
    except ValueError as exc:
        raise GenerationError(str(exc)) from None
    _write(args.out, write_edge_list, query)
    if args.labels_out:
        _write(args.labels_out, write_labels, query)
    return query


def cmd_bench(args):
    datasets = {str(p): read_graph(p, args.labels) for p in args.data}
    config = _config(args)
    if args.sweep == "ablation":
        if not args.query:
            raise UsageError("--sweep ablation needs --query")
        query = read_graph(args.query, args.query_labels)
        points = ablation(datasets, query, config, repeats=args.repeats, query_name=str(args.query))
    else:
        if len(datasets) != 1:
            raise UsageError(f"--sweep {args.sweep} takes exactly one --data")
        (name, graph), = datasets.items()
        if args.sweep == "labels":
            values = args.values or list(range(20, 201, 20))
            points = sweep_labels(graph, values, config, args.queries, args.repeats,
                                  args.query_nodes, args.query_edges, args.seed, name)
        else:
            values = args.values or list(range(3, 14))
            points = sweep_query_size(graph, values, config, args.queries, args.repeats,
                                      args.extra_edges, args.seed, name)
    doc = {"sweep": args.sweep, "datasets": list(datasets), "repeats": args.repeats,
           "seed": args.seed, "points": points}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2))
    if args.output == "json":
        print(json.dumps(doc, indent=2))
    else:
        for pt in points:
            key = {k: v for k, v in pt.items() if k not in ("counts", "failures", "with", "without")}
            print(" ".join(f"{k}={v:.2f}" if isinstance(v, float) else f"{k}={v}" for k, v in key.items()))
    return points


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gsmatch", description="Breadth-first subgraph matching on CSR graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def inputs(p, query=True, query_required=True):
        p.add_argument("--data", required=True)
        p.add_argument("--labels", help="node label file for --data")
        if query:
            p.add_argument("--query", required=query_required)
            p.add_argument("--query-labels")
        p.add_argument("--output", choices=("text", "json"), default="text")

    p = sub.add_parser("match", help="count or list embeddings of a query")
    inputs(p)
    _add_match_flags(p)
    p.add_argument("--enumerate", action="store_true")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("oracle", help="reference backtracking count")
    inputs(p)
    _add_match_flags(p)
    p.add_argument("--compare", action="store_true", help="also run the matcher and compare")
    p.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate labels or a random-walk query")
    p.add_argument("what", choices=("labels", "query"))
    p.add_argument("--data", required=True)
    p.add_argument("--labels")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=_positive, default=20, help="number of labels")
    p.add_argument("--nodes", type=_positive, default=12)
    p.add_argument("--edges", type=int, default=22)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--labels-out", help="label file for a generated query")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="parameter sweeps with JSON aggregates")
    p.add_argument("--data", required=True, action="append")
    p.add_argument("--labels")
    p.add_argument("--query")
    p.add_argument("--query-labels")
    p.add_argument("--sweep", choices=("labels", "query-size", "ablation"), required=True)
    p.add_argument("--values", type=_range, help="e.g. 20:200:20 or 3,5,7")
    p.add_argument("--queries", type=_positive, default=10)
    p.add_argument("--repeats", type=_positive, default=10)
    p.add_argument("--query-nodes", type=_positive, default=12)
    p.add_argument("--query-edges", type=_positive, default=22)
    p.add_argument("--extra-edges", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="also write the JSON document here")
    p.add_argument("--output", choices=("text", "json"), default="text")
    _add_match_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"gsmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphParseError, DisconnectedQueryError) as exc:
        print(f"gsmatch: invalid input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"gsmatch: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except GenerationError as exc:
        print(f"gsmatch: generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except BudgetExceededError as exc:
        print(f"gsmatch: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

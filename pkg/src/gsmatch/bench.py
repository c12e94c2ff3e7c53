"""Run records and parameter sweeps for the command line."""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass, field

from .errors import GsmError
from .generate import assign_powerlaw_labels, random_walk_query
from .graph import CsrGraph
from .matcher import MatchConfig, match

__all__ = ["RunRecord", "run_match", "sweep_labels", "sweep_query_size", "ablation", "summarize"]


@dataclass
class RunRecord:
    """One timed match, laid out like the JSON the CLI emits."""

    dataset: str
    query: str
    config: dict
    count: int
    timings_ms: dict
    rows: dict
    peak_rows: int
    wall_ms: float
    candidate_sizes: list = field(default_factory=list)
    matches: list | None = None

    def to_json(self) -> dict:
        doc = asdict(self)
        if doc["matches"] is None:
            del doc["matches"]
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "RunRecord":
        return cls(**{"matches": None, **doc})


def config_echo(config: MatchConfig) -> dict:
    return {
        "refine_rounds": config.refine_rounds,
        "lookahead": config.lookahead_depth,
        "enumerate": config.enumerate,
        "workers": config.workers,
        "max_rows": config.max_rows,
    }


def run_match(graph: CsrGraph, query: CsrGraph, config: MatchConfig,
              dataset: str = "", query_name: str = "") -> RunRecord:
    """Time :func:`match`; listed matches are translated to external node IDs."""
    t0 = time.perf_counter()
    report = match(graph, query, config)
    wall = (time.perf_counter() - t0) * 1e3
    matches = None
    if report.matches is not None:
        matches = [[graph.external_id(v) for v in m] for m in report.matches]
    return RunRecord(
        dataset=dataset,
        query=query_name,
        config=config_echo(config),
        count=report.count,
        timings_ms={
            "precompute": report.timings["precompute"],
            "filter": report.timings["filter"],
            "verify": list(report.timings["verify"]),
        },
        rows={"pre_compaction": report.pre_compaction, "post_compaction": report.post_compaction},
        peak_rows=report.peak_rows,
        wall_ms=wall,
        candidate_sizes=report.candidate_sizes,
        matches=matches,
    )


def summarize(times: list[float]) -> dict:
    if not times:
        return {"mean_ms": None, "std_ms": None, "runs": 0}
    return {
        "mean_ms": statistics.fmean(times),
        "std_ms": statistics.stdev(times) if len(times) > 1 else 0.0,
        "runs": len(times),
    }


def _query_batch(graph, nodes, edges, queries, seed):
    """``queries`` random-walk queries; failures are returned, not raised."""
    out, failures = [], []
    for q in range(queries):
        try:
            out.append((f"rw{nodes}n{edges}e-s{seed}-{q}",
                        random_walk_query(graph, nodes, edges, seed=(seed, q))))
        except (GsmError, ValueError) as exc:
            failures.append({"query": q, "error": str(exc)})
    return out, failures


def _run_point(graph, batch, config, repeats, dataset):
    times, counts, failures = [], [], []
    rec = None
    for name, query in batch:
        for _ in range(repeats):
            try:
                rec = run_match(graph, query, config, dataset, name)
            except GsmError as exc:
                failures.append({"query": name, "error": str(exc)})
                break
            times.append(rec.wall_ms)
        else:
            counts.append(rec.count)
    return times, counts, failures, rec


def sweep_labels(graph: CsrGraph, label_counts, config: MatchConfig, queries: int = 10,
                 repeats: int = 10, nodes: int = 12, edges: int = 22, seed: int = 0,
                 dataset: str = "") -> list[dict]:
    """Runtime versus number of power-law labels on the data graph."""
    points = []
    for count in label_counts:
        labeled = assign_powerlaw_labels(graph, count, seed=seed)
        batch, failures = _query_batch(labeled, nodes, edges, queries, seed)
        times, counts, more, _ = _run_point(labeled, batch, config, repeats, dataset)
        points.append({"labels": count, **summarize(times), "counts": counts,
                       "failures": failures + more})
    return points


def sweep_query_size(graph: CsrGraph, sizes, config: MatchConfig, queries: int = 10,
                     repeats: int = 10, extra_edges: int = 1, seed: int = 0,
                     dataset: str = "") -> list[dict]:
    """Runtime versus query size; each query has ``size - 1 + extra_edges`` edges."""
    points = []
    for size in sizes:
        edges = min(size - 1 + extra_edges, size * (size - 1) // 2)
        batch, failures = _query_batch(graph, size, edges, queries, seed)
        times, counts, more, _ = _run_point(graph, batch, config, repeats, dataset)
        points.append({"query_nodes": size, "query_edges": edges, **summarize(times),
                       "counts": counts, "failures": failures + more})
    return points


def ablation(datasets: dict[str, CsrGraph], query: CsrGraph, config: MatchConfig,
             repeats: int = 10, query_name: str = "") -> list[dict]:
    """Look-ahead on (configured depth) versus off, per dataset."""
    off = MatchConfig(**{**asdict(config), "lookahead_depth": 0})
    points = []
    for name, graph in datasets.items():
        row = {"dataset": name}
        for tag, cfg in (("with", config), ("without", off)):
            times, counts, failures, rec = _run_point(graph, [(query_name, query)], cfg, repeats, name)
            row[tag] = {
                **summarize(times),
                "count": counts[0] if counts else None,
                "rows_pre_compaction": sum(rec.rows["pre_compaction"]) if counts else None,
                "failures": failures,
            }
        w, wo = row["with"]["mean_ms"], row["without"]["mean_ms"]
        row["speedup"] = wo / w if w and wo else None
        points.append(row)
    return points

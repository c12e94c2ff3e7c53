"""Breadth-first filtering-and-verification subgraph matcher.

The pipeline runs in bulk-synchronous phases over a CSR data graph:

1. plan the query (visit order, spanning tree, symmetry constraints),
2. filter data nodes into per-position candidate sets using label, degree
   and neighborhood encoding (NE), refined over several rounds,
3. seed one partial row per candidate of position 0, then for every later
   position *advance* each row along the data edges of its spanning-tree
   parent, *compute* the remaining constraints on every new endpoint, and
   *compact* survivors into a fresh contiguous table.

Rows are split into chunks that are verified independently and merged in
chunk order, so the result does not depend on the number of workers.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .encoding import PartialTable
from .errors import ResourceLimitError
from .graph import CsrGraph, compute_stats
from .plan import QueryPlan, compute_order

__all__ = [
    "CandidateSet",
    "Lookahead",
    "MatchConfig",
    "MatchReport",
    "compute_ne",
    "filter_candidates",
    "lookahead_check",
    "match",
    "seed_table",
    "verify_step",
]

log = logging.getLogger(__name__)

DEFAULT_MAX_ROWS = 1 << 28
DEFAULT_CHUNK = 1 << 21


@dataclass(frozen=True)
class MatchConfig:
    """Tunable knobs of :func:`match`.

    ``chunk_size`` bounds the number of advanced (row, neighbor) pairs held
    at once; ``symmetry=False`` disables ID constraints so every automorphic
    copy of a match is reported.
    """

    refine_rounds: int = 2
    lookahead_depth: int = 2
    enumerate: bool = False
    max_rows: int = DEFAULT_MAX_ROWS
    workers: int = 1
    chunk_size: int = DEFAULT_CHUNK
    symmetry: bool = True

    def __post_init__(self):
        if self.refine_rounds < 1:
            raise ValueError("refine_rounds must be >= 1")
        if self.lookahead_depth not in (0, 1, 2):
            raise ValueError("lookahead_depth must be 0, 1 or 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.max_rows < 1 or self.chunk_size < 1:
            raise ValueError("max_rows and chunk_size must be positive")


class CandidateSet:
    """Per-position candidate data nodes.

    ``masks[i]`` is a boolean array over data nodes; ``sets[i]`` lists the
    same nodes in ascending order.
    """

    def __init__(self, masks):
        self.masks = [np.asarray(m, dtype=bool) for m in masks]
        self.sets = [np.flatnonzero(m) for m in self.masks]

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, i):
        return self.sets[i]

    @property
    def sizes(self) -> list[int]:
        return [len(s) for s in self.sets]

    def any_empty(self) -> bool:
        return any(len(s) == 0 for s in self.sets)


@dataclass
class MatchReport:
    count: int
    matches: list[tuple[int, ...]] | None
    pre_compaction: list[int]
    post_compaction: list[int]
    timings: dict
    plan: QueryPlan
    candidate_sizes: list[int]
    storage_bits: list[int] = field(default_factory=list)

    @property
    def peak_rows(self) -> int:
        return max(self.post_compaction, default=0)

    def canonical(self) -> dict:
        """Count and enumeration only; stable across runs and worker counts."""
        return {
            "count": self.count,
            "matches": None if self.matches is None else [list(m) for m in self.matches],
            "pre_compaction": self.pre_compaction,
            "post_compaction": self.post_compaction,
        }


def _neighbor_sum(graph: CsrGraph, weights: np.ndarray) -> np.ndarray:
    """Sum of ``weights`` over each node's neighbors."""
    if not len(graph.col_indices):
        return np.zeros(graph.num_nodes, dtype=np.int64)
    total = np.bincount(graph.edge_sources, weights=weights[graph.col_indices],
                        minlength=graph.num_nodes)
    return np.rint(total).astype(np.int64)


def compute_ne(graph: CsrGraph, alive: np.ndarray | None = None) -> np.ndarray:
    """Neighborhood encoding: sum of neighbor labels, optionally over ``alive`` neighbors."""
    labels = graph.label_array()
    if alive is not None:
        labels = labels * alive
    return _neighbor_sum(graph, labels)


def filter_candidates(graph: CsrGraph, plan: QueryPlan, rounds: int = 2) -> CandidateSet:
    """Label/degree/NE filter with ``rounds - 1`` refinement passes.

    Refinement recomputes every data node's degree and NE counting only
    neighbors that survive in some candidate set, then re-tests the nodes
    still in each set.  Sets never grow.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    labels = graph.label_array()
    deg = graph.degrees
    ne = compute_ne(graph)
    masks = []
    for i in range(plan.size):
        masks.append(
            (labels == plan.position_label(i))
            & (deg >= plan.position_deg(i))
            & (ne >= plan.position_ne(i))
        )
    for _ in range(rounds - 1):
        alive = np.logical_or.reduce(masks)
        eff_deg = _neighbor_sum(graph, alive.astype(np.int64))
        eff_ne = compute_ne(graph, alive)
        new = [
            m & (eff_deg >= plan.position_deg(i)) & (eff_ne >= plan.position_ne(i))
            for i, m in enumerate(masks)
        ]
        stable = all(np.array_equal(a, b) for a, b in zip(masks, new))
        masks = new
        if stable:
            break
    return CandidateSet(masks)


class Lookahead:
    """Per-node neighbor counts backing the vectorized look-ahead test.

    For a candidate ``v`` mapped at position ``i`` and each later position
    ``k`` adjacent to it in the query, depth 1 requires a neighbor ``w`` of
    ``v`` in candidate set ``k`` that is not already mapped.  Depth 2 also
    requires ``w`` to have, for every other later query neighbor ``m`` of
    ``order[k]``, a neighbor in candidate set ``m`` other than ``v``.
    """

    def __init__(self, graph: CsrGraph, plan: QueryPlan, cset: CandidateSet, depth: int):
        self.graph = graph
        self.plan = plan
        self.cset = cset
        self.depth = depth
        self._good: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
        self._counts: dict[int, np.ndarray] = {}

    def _cand_count(self, k: int) -> np.ndarray:
        if k not in self._counts:
            self._counts[k] = _neighbor_sum(self.graph, self.cset.masks[k].astype(np.int64))
        return self._counts[k]

    def second_hop(self, i: int, k: int) -> list[int]:
        if self.depth < 2:
            return []
        pos = self.plan.position
        return sorted(pos[w] for w in self.plan.neighbors[self.plan.order[k]]
                      if pos[w] > i and pos[w] != k)

    def _good_for(self, k: int, hops: tuple[int, ...], pattern: tuple[bool, ...]):
        # pattern[t]: whether v itself is in candidate set hops[t]; if so, w
        # needs a second such neighbor because v is taken.
        key = (k, hops, pattern)
        if key not in self._good:
            good = self.cset.masks[k]
            for m, v_in in zip(hops, pattern):
                good = good & (self._cand_count(m) >= 1 + v_in)
            self._good[key] = (good, _neighbor_sum(self.graph, good.astype(np.int64)))
        return self._good[key]

    def passes(self, i: int, cand: np.ndarray, mapped: np.ndarray) -> np.ndarray:
        """Vectorized test for candidates ``cand`` extending rows ``mapped`` (shape (r, i))."""
        keep = np.ones(len(cand), dtype=bool)
        if self.depth == 0:
            return keep
        for k in self.plan.later_neighbors(i):
            hops = tuple(self.second_hop(i, k))
            if hops:
                member = np.column_stack([self.cset.masks[m][cand] for m in hops])
                patterns, inverse = np.unique(member, axis=0, return_inverse=True)
                inverse = inverse.reshape(-1)
            else:
                patterns, inverse = np.zeros((1, 0), dtype=bool), np.zeros(len(cand), dtype=np.int64)
            for p_idx, pattern in enumerate(patterns):
                sel = np.flatnonzero((inverse == p_idx) & keep)
                if not len(sel):
                    continue
                good, count = self._good_for(k, hops, tuple(bool(x) for x in pattern))
                c = cand[sel]
                avail = count[c]
                for j in range(mapped.shape[1]):
                    col = mapped[sel, j]
                    hit = np.flatnonzero(good[col])
                    if len(hit):
                        avail[hit] -= self.graph.has_edges(col[hit], c[hit])
                keep[sel] = avail >= 1
        return keep


def lookahead_check(graph: CsrGraph, plan: QueryPlan, cset: CandidateSet, partial_row,
                    candidate_v: int, position_i: int, depth: int) -> bool:
    """Scalar look-ahead for one extension; a necessary condition only.

    ``partial_row`` holds the data nodes mapped at positions ``0..i-1``.
    Returns False only when no complete match can extend
    ``partial_row + (candidate_v,)``.
    """
    if depth == 0:
        return True
    v = int(candidate_v)
    mapped = set(int(x) for x in partial_row) | {v}
    pos = plan.position
    for k in plan.later_neighbors(position_i):
        hops = []
        if depth >= 2:
            hops = [pos[q] for q in plan.neighbors[plan.order[k]]
                    if pos[q] > position_i and pos[q] != k]
        ok = False
        for w in graph.neighbors(v):
            w = int(w)
            if w in mapped or not cset.masks[k][w]:
                continue
            if all(any(int(x) != v and cset.masks[m][x] for x in graph.neighbors(w)) for m in hops):
                ok = True
                break
        if not ok:
            return False
    return True


def seed_table(graph: CsrGraph, plan: QueryPlan, cset: CandidateSet,
               lookahead: Lookahead | None = None) -> PartialTable:
    """Iteration 0: one row per surviving candidate of position 0."""
    cand = cset[0]
    if lookahead is not None and len(cand):
        cand = cand[lookahead.passes(0, cand, np.zeros((len(cand), 0), dtype=np.int64))]
    table = PartialTable.from_columns(cand[:, None], graph.num_nodes)
    table.advanced = len(cset[0])
    return table


def _expand_chunk(graph, plan, cset, lookahead, cols, i):
    """Advance + compute for one chunk of decoded rows; returns (new columns, advanced)."""
    offsets = graph.row_offsets
    src = cols[:, plan.parent[i]]
    starts = offsets[src]
    counts = offsets[src + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros((0, i + 1), dtype=np.int64), 0
    row_idx = np.repeat(np.arange(len(cols)), counts)
    local = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    cand = graph.col_indices[starts[row_idx] + local]

    # cheapest tests first; each one shrinks the frontier for the next
    for j, rel in plan.id_constraints[i]:
        other = cols[row_idx, j]
        keep = cand > other if rel == ">" else cand < other
        row_idx, cand = row_idx[keep], cand[keep]
    keep = cset.masks[i][cand]
    row_idx, cand = row_idx[keep], cand[keep]
    for j in range(i):
        keep = cand != cols[row_idx, j]
        row_idx, cand = row_idx[keep], cand[keep]
    for j in plan.non_tree[i]:
        keep = graph.has_edges(cols[row_idx, j], cand)
        row_idx, cand = row_idx[keep], cand[keep]
    if lookahead is not None and len(cand):
        keep = lookahead.passes(i, cand, cols[row_idx])
        row_idx, cand = row_idx[keep], cand[keep]
    return np.column_stack([cols[row_idx], cand]), total


def _chunks(graph, table: PartialTable, parent_pos: int, budget: int):
    if not len(table):
        return []
    src = table.column(parent_pos)
    work = np.cumsum(graph.degrees[src])
    bounds = [0]
    while bounds[-1] < len(table):
        start = bounds[-1]
        base = work[start - 1] if start else 0
        stop = int(np.searchsorted(work, base + budget, side="right"))
        bounds.append(max(stop, start + 1))
    return list(zip(bounds[:-1], bounds[1:]))


def verify_step(graph: CsrGraph, plan: QueryPlan, cset: CandidateSet, partials: PartialTable,
                i: int, config: MatchConfig = MatchConfig(),
                lookahead: Lookahead | None = None) -> PartialTable:
    """Extend every length-``i`` row by one data node for position ``i``.

    The returned table has ``advanced`` set to the number of (row, neighbor)
    pairs generated before filtering and compaction.
    """
    if partials.length != i:
        raise ValueError(f"expected rows of length {i}, got {partials.length}")
    n = graph.num_nodes
    spans = _chunks(graph, partials, plan.parent[i], config.chunk_size)

    def work(span):
        cols = partials.columns(*span)
        new_cols, adv = _expand_chunk(graph, plan, cset, lookahead, cols, i)
        return PartialTable.from_columns(new_cols, n), adv

    if config.workers > 1 and len(spans) > 1:
        pool = ThreadPoolExecutor(max_workers=config.workers)
        results = pool.map(work, spans)
    else:
        pool = None
        results = map(work, spans)
    parts, advanced, rows = [], 0, 0
    try:
        for part, adv in results:
            rows += len(part)
            if rows > config.max_rows:
                raise ResourceLimitError(i, rows, config.max_rows)
            parts.append(part)
            advanced += adv
    finally:
        if pool is not None:
            pool.shutdown(wait=True, cancel_futures=True)
    table = PartialTable.concat(parts, i + 1, n)
    table.advanced = advanced
    return table


def match(graph: CsrGraph, query: CsrGraph, config: MatchConfig = MatchConfig()) -> MatchReport:
    """Count (and optionally list) embeddings of ``query`` in ``graph``.

    Each automorphism class of embeddings is reported once unless
    ``config.symmetry`` is False.  Listed matches map query node ``u`` to
    ``match[u]`` and are sorted lexicographically.
    """
    t0 = time.perf_counter()
    stats = compute_stats(graph)
    plan = compute_order(query, stats, symmetry=config.symmetry)
    t1 = time.perf_counter()
    cset = filter_candidates(graph, plan, config.refine_rounds)
    t2 = time.perf_counter()
    timings = {"precompute": (t1 - t0) * 1e3, "filter": (t2 - t1) * 1e3, "verify": []}
    k = plan.size
    pre, post, bits = [], [], []

    if cset.any_empty():
        log.debug("empty candidate set; skipping verification")
        timings["verify"] = [0.0] * k
        return MatchReport(0, [] if config.enumerate else None, [0] * k, [0] * k,
                           timings, plan, cset.sizes, [0] * k)

    look = Lookahead(graph, plan, cset, config.lookahead_depth) if config.lookahead_depth else None
    table = seed_table(graph, plan, cset, look)
    if len(table) > config.max_rows:
        raise ResourceLimitError(0, len(table), config.max_rows)
    t3 = time.perf_counter()
    timings["verify"].append((t3 - t2) * 1e3)
    pre.append(table.advanced)
    post.append(len(table))
    bits.append(table.storage_bits)
    for i in range(1, k):
        ts = time.perf_counter()
        table = verify_step(graph, plan, cset, table, i, config, look)
        timings["verify"].append((time.perf_counter() - ts) * 1e3)
        pre.append(table.advanced)
        post.append(len(table))
        bits.append(table.storage_bits)
        log.debug("iteration %d: %d advanced, %d kept", i, table.advanced, len(table))

    matches = None
    if config.enumerate:
        cols = table.columns()
        by_node = cols[:, list(plan.position)] if len(cols) else cols.reshape(0, k)
        by_node = np.unique(by_node, axis=0)
        matches = [tuple(int(x) for x in r) for r in by_node]
    return MatchReport(len(table), matches, pre, post, timings, plan, cset.sizes, bits)

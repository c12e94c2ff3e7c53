"""Undirected graphs in compressed sparse row form, plus text loaders.

Graphs are simple (no self-loops, no parallel edges) and undirected: every
edge is stored twice, once in each endpoint's neighbor list.  Node IDs are
compacted to ``0..num_nodes-1``; the original IDs are kept in ``node_ids``
so results can be reported in the caller's namespace.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, TextIO

import numpy as np

from .errors import GraphParseError

__all__ = [
    "CsrGraph",
    "GraphStats",
    "from_edges",
    "load_edge_list",
    "load_labels",
    "load_matrix_market",
    "write_edge_list",
    "write_labels",
    "compute_stats",
]


def _frozen(a, dtype=np.int64):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CsrGraph:
    """Immutable undirected graph.

    Attributes
    ----------
    row_offsets : ndarray, shape (num_nodes + 1,)
        ``col_indices[row_offsets[v]:row_offsets[v + 1]]`` are the neighbors of v.
    col_indices : ndarray, shape (2 * num_edges,)
        Concatenated neighbor lists, each strictly ascending.
    labels : ndarray or None
        Positive integer node labels.
    node_ids : ndarray or None
        Original (external) ID of every compacted node.
    """

    row_offsets: np.ndarray
    col_indices: np.ndarray
    labels: np.ndarray | None = None
    node_ids: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "row_offsets", _frozen(self.row_offsets))
        object.__setattr__(self, "col_indices", _frozen(self.col_indices))
        if self.labels is not None:
            labels = _frozen(self.labels)
            if len(labels) != self.num_nodes:
                raise ValueError("labels length does not match num_nodes")
            if len(labels) and labels.min() < 1:
                raise ValueError("node labels must be >= 1")
            object.__setattr__(self, "labels", labels)
        if self.node_ids is not None:
            object.__setattr__(self, "node_ids", _frozen(self.node_ids))

    @property
    def num_nodes(self) -> int:
        return len(self.row_offsets) - 1

    @property
    def num_edges(self) -> int:
        return len(self.col_indices) // 2

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    @cached_property
    def degrees(self) -> np.ndarray:
        return _frozen(np.diff(self.row_offsets))

    @cached_property
    def edge_sources(self) -> np.ndarray:
        """Source node of every entry of ``col_indices``."""
        return _frozen(np.repeat(np.arange(self.num_nodes), self.degrees))

    @cached_property
    def edge_keys(self) -> np.ndarray:
        # Row-major CSR with sorted rows makes these keys globally sorted.
        return _frozen(self.edge_sources * self.num_nodes + self.col_indices)

    def label_array(self) -> np.ndarray:
        """Labels, or all ones for an unlabeled graph."""
        if self.labels is None:
            return np.ones(self.num_nodes, dtype=np.int64)
        return self.labels

    def label(self, v: int) -> int:
        return 1 if self.labels is None else int(self.labels[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v]:self.row_offsets[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        k = np.searchsorted(nbrs, v)
        return bool(k < len(nbrs) and nbrs[k] == v)

    def has_edges(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorized adjacency test for parallel arrays of endpoints."""
        keys = np.asarray(us, dtype=np.int64) * self.num_nodes + np.asarray(vs, dtype=np.int64)
        if not len(self.edge_keys):
            return np.zeros(len(keys), dtype=bool)
        idx = np.searchsorted(self.edge_keys, keys)
        np.minimum(idx, len(self.edge_keys) - 1, out=idx)
        return self.edge_keys[idx] == keys

    def edges(self) -> np.ndarray:
        """Undirected edges as an (m, 2) array with ``u < v``, sorted."""
        src = self.edge_sources
        keep = src < self.col_indices
        return np.column_stack([src[keep], self.col_indices[keep]])

    def with_labels(self, labels) -> "CsrGraph":
        return CsrGraph(self.row_offsets, self.col_indices, labels, self.node_ids)

    def external_id(self, v: int) -> int:
        return int(v) if self.node_ids is None else int(self.node_ids[v])

    def same_structure(self, other: "CsrGraph") -> bool:
        """True when both graphs have identical arrays (labels included)."""
        if not (
            np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
        ):
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        return self.labels is None or np.array_equal(self.labels, other.labels)

    def __repr__(self):
        kind = "labeled" if self.is_labeled else "unlabeled"
        return f"CsrGraph({self.num_nodes} nodes, {self.num_edges} edges, {kind})"


def from_edges(num_nodes, edges, labels=None, node_ids=None) -> CsrGraph:
    """Build a canonical CsrGraph from an iterable of (u, v) pairs.

    Self-loops are dropped and duplicate or reversed edges merged.
    """
    e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    e = e.reshape(-1, 2)
    if len(e) and (e.min() < 0 or e.max() >= num_nodes):
        raise ValueError("edge endpoint out of range")
    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    if num_nodes:
        keys = np.unique(both[:, 0] * num_nodes + both[:, 1])
        src, dst = keys // num_nodes, keys % num_nodes
    else:
        src = dst = np.zeros(0, dtype=np.int64)
    offsets = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=num_nodes), out=offsets[1:])
    return CsrGraph(offsets, dst, labels, node_ids)


def _lines(stream):
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    return enumerate(stream, start=1)


def load_edge_list(stream: TextIO | str, label_stream: TextIO | str | None = None) -> CsrGraph:
    """Read a whitespace-separated ``u v`` edge list.

    Lines starting with ``#`` (or ``%``) are comments; extra columns are
    ignored.  External IDs are compacted in first-seen order.  An optional
    label stream holds ``node_id label`` lines in the external namespace.
    """
    index: dict[int, int] = {}
    pairs = []
    for lineno, line in _lines(stream):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        parts = s.split()
        if len(parts) < 2:
            raise GraphParseError(f"expected 'u v', got {s!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer node id in {s!r}", lineno) from None
        if u < 0 or v < 0:
            raise GraphParseError(f"negative node id in {s!r}", lineno)
        cu = index.setdefault(u, len(index))
        cv = index.setdefault(v, len(index))
        pairs.append((cu, cv))
    if not index:
        raise GraphParseError("empty graph: no edges found")
    node_ids = np.fromiter(index.keys(), dtype=np.int64, count=len(index))
    labels = None
    if label_stream is not None:
        labels = load_labels(label_stream, index)
    return from_edges(len(index), np.array(pairs, dtype=np.int64), labels, node_ids)


def load_labels(stream: TextIO | str, index: dict[int, int] | int) -> np.ndarray:
    """Read ``node_id label`` lines.

    ``index`` maps external IDs to compact IDs, or is a node count when the
    IDs are already compact.  Every node must receive a label.
    """
    n = index if isinstance(index, int) else len(index)
    labels = np.zeros(n, dtype=np.int64)
    for lineno, line in _lines(stream):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        parts = s.split()
        if len(parts) < 2:
            raise GraphParseError(f"expected 'node label', got {s!r}", lineno)
        try:
            node, lab = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer field in {s!r}", lineno) from None
        if lab < 1:
            raise GraphParseError(f"label must be >= 1, got {lab}", lineno)
        if isinstance(index, int):
            if not 0 <= node < n:
                raise GraphParseError(f"unknown node {node}", lineno)
            labels[node] = lab
        else:
            if node not in index:
                raise GraphParseError(f"unknown node {node}", lineno)
            labels[index[node]] = lab
    missing = np.flatnonzero(labels == 0)
    if len(missing):
        raise GraphParseError(f"{len(missing)} node(s) have no label")
    return labels


_MM_FIELDS = {"pattern", "real", "integer", "double"}
_MM_SYMMETRY = {"general", "symmetric"}


def load_matrix_market(stream: TextIO | str) -> CsrGraph:
    """Read a coordinate-format Matrix Market file as an undirected graph.

    Entry values are ignored.  IDs stay dense (``row - 1``), so declared
    isolated nodes are preserved.
    """
    lines = _lines(stream)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise GraphParseError("empty file") from None
    tokens = header.strip().lower().split()
    if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
        raise GraphParseError("missing %%MatrixMarket header", lineno)
    _, obj, fmt, fld, sym = tokens
    if obj != "matrix":
        raise GraphParseError(f"unsupported object {obj!r}", lineno)
    if fmt != "coordinate":
        raise GraphParseError(f"unsupported format {fmt!r}", lineno)
    if fld not in _MM_FIELDS:
        raise GraphParseError(f"unsupported field {fld!r}", lineno)
    if sym not in _MM_SYMMETRY:
        raise GraphParseError(f"unsupported symmetry {sym!r}", lineno)

    size = None
    rows, cols = [], []
    for lineno, line in lines:
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        try:
            if size is None:
                nr, nc, _nnz = (int(x) for x in parts[:3])
                size = max(nr, nc)
                continue
            r, c = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise GraphParseError(f"malformed entry {s!r}", lineno) from None
        if not (1 <= r <= size and 1 <= c <= size):
            raise GraphParseError(f"index out of range in {s!r}", lineno)
        rows.append(r - 1)
        cols.append(c - 1)
    if not size:
        raise GraphParseError("empty graph: no size line")
    edges = np.column_stack([np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)])
    return from_edges(size, edges)


def write_edge_list(graph: CsrGraph, stream: TextIO) -> None:
    """Write ``graph`` so that :func:`load_edge_list` reproduces it exactly.

    Edges are ordered so each node is first seen in its compact-ID order; a
    self-loop line introduces a node that has no suitable edge.  Original IDs are written when
    the graph carries them.
    """
    ext = graph.node_ids if graph.node_ids is not None else np.arange(graph.num_nodes)
    n = graph.num_nodes
    seen = np.zeros(n, dtype=bool)
    intro = []
    for k in range(n):
        if seen[k]:
            continue
        nbrs = graph.neighbors(k)
        if len(nbrs) and nbrs[0] < k:
            intro.append((int(nbrs[0]), k))
        elif len(nbrs) and nbrs[0] == k + 1:
            intro.append((k, k + 1))
            seen[k + 1] = True
        else:
            # a self-loop line registers k alone and is then dropped
            intro.append((k, k))
        seen[k] = True
    written = set()
    for u, v in intro:
        stream.write(f"{ext[u]} {ext[v]}\n")
        written.add((min(u, v), max(u, v)))
    for u, v in graph.edges():
        if (u, v) not in written:
            stream.write(f"{ext[u]} {ext[v]}\n")


def write_labels(graph: CsrGraph, stream: TextIO) -> None:
    ext = graph.node_ids if graph.node_ids is not None else np.arange(graph.num_nodes)
    for v, lab in enumerate(graph.label_array()):
        stream.write(f"{ext[v]} {lab}\n")


@dataclass(frozen=True)
class GraphStats:
    """Label and degree summaries of a data graph.

    ``degree_histogram[d]`` is the number of nodes with degree >= d for every
    degree d that occurs.  ``label_degrees`` keeps, per label, the sorted
    degrees of nodes carrying it, which answers joint (label, degree >= d)
    queries.
    """

    num_nodes: int
    label_frequency: dict[int, int]
    degree_histogram: dict[int, int]
    label_degrees: dict[int, np.ndarray] = field(repr=False)
    max_degree: int = 0

    def count_compatible(self, label: int, min_degree: int) -> int:
        degs = self.label_degrees.get(int(label))
        if degs is None:
            return 0
        return int(len(degs) - np.searchsorted(degs, min_degree, side="left"))


def compute_stats(graph: CsrGraph) -> GraphStats:
    deg = graph.degrees
    labels = graph.label_array()
    uniq, counts = np.unique(labels, return_counts=True)
    label_frequency = {int(k): int(c) for k, c in zip(uniq, counts)}
    ds, dcounts = np.unique(deg, return_counts=True)
    at_least = np.cumsum(dcounts[::-1])[::-1]
    degree_histogram = {int(d): int(c) for d, c in zip(ds, at_least)}
    order = np.lexsort((deg, labels))
    sorted_labels = labels[order]
    sorted_degs = deg[order]
    bounds = np.searchsorted(sorted_labels, uniq, side="left")
    ends = np.searchsorted(sorted_labels, uniq, side="right")
    label_degrees = {
        int(k): _frozen(sorted_degs[b:e]) for k, b, e in zip(uniq, bounds, ends)
    }
    return GraphStats(
        num_nodes=graph.num_nodes,
        label_frequency=label_frequency,
        degree_histogram=degree_histogram,
        label_degrees=label_degrees,
        max_degree=int(deg.max()) if len(deg) else 0,
    )


def disjoint_union(graphs: Iterable[CsrGraph]) -> CsrGraph:
    """Place copies of several graphs side by side, shifting node IDs."""
    graphs = list(graphs)
    offset = 0
    parts, labels = [], []
    for g in graphs:
        parts.append(g.edges() + offset)
        labels.append(g.label_array())
        offset += g.num_nodes
    labeled = any(g.is_labeled for g in graphs)
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return from_edges(offset, edges, np.concatenate(labels) if labeled else None)

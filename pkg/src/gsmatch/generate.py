"""Synthetic workloads: labels, random-walk queries and test graph families."""

from __future__ import annotations

import numpy as np

from .errors import GenerationError
from .graph import CsrGraph, from_edges

__all__ = [
    "POWERLAW_ALPHA",
    "assign_powerlaw_labels",
    "random_walk_query",
    "erdos_renyi",
    "delaunay_graph",
    "chain_with_tails",
    "clique",
    "cycle",
    "path",
    "star",
]

POWERLAW_ALPHA = 1.0


def assign_powerlaw_labels(graph: CsrGraph, label_count: int, seed=None,
                           alpha: float = POWERLAW_ALPHA) -> CsrGraph:
    """Return a copy of ``graph`` with Zipf-distributed node labels.

    Label ``l`` in ``1..label_count`` is drawn with probability
    proportional to ``l ** -alpha``.
    """
    if label_count < 1:
        raise ValueError("label_count must be >= 1")
    rng = np.random.default_rng(seed)
    weights = np.arange(1, label_count + 1, dtype=float) ** -alpha
    labels = rng.choice(label_count, size=graph.num_nodes, p=weights / weights.sum()) + 1
    return graph.with_labels(labels)


def random_walk_query(graph: CsrGraph, num_nodes: int, num_edges: int, seed=None,
                      max_restarts: int = 100) -> CsrGraph:
    """Sample a connected query graph with a random walk over ``graph``.

    The first ``num_nodes`` distinct nodes reached by the walk become the
    query nodes, numbered in visit order.  The edges that first reached each
    node form a spanning tree; the remaining ``num_edges - (num_nodes - 1)``
    edges are drawn uniformly from the rest of the induced subgraph.  Labels
    are inherited from the data graph.
    """
    if num_nodes < 1:
        raise ValueError("num_nodes must be >= 1")
    if not num_nodes - 1 <= num_edges <= num_nodes * (num_nodes - 1) // 2:
        raise ValueError(f"num_edges={num_edges} impossible for {num_nodes} connected nodes")
    rng = np.random.default_rng(seed)
    n = graph.num_nodes
    if n < num_nodes:
        raise GenerationError(f"data graph has only {n} nodes")
    walk_budget = 100 * num_nodes + 1000
    for _ in range(max_restarts):
        cur = int(rng.integers(n))
        visited = {cur: 0}
        tree = []
        steps = 0
        while len(visited) < num_nodes and steps < walk_budget:
            nbrs = graph.neighbors(cur)
            if not len(nbrs):
                break
            nxt = int(nbrs[rng.integers(len(nbrs))])
            if nxt not in visited:
                visited[nxt] = len(visited)
                tree.append((visited[cur], visited[nxt]))
            cur = nxt
            steps += 1
        if len(visited) < num_nodes:
            continue
        nodes = np.fromiter(visited.keys(), dtype=np.int64, count=num_nodes)
        tree_set = {(min(a, b), max(a, b)) for a, b in tree}
        extra = [
            (a, b)
            for a in range(num_nodes)
            for b in range(a + 1, num_nodes)
            if (a, b) not in tree_set and graph.has_edge(int(nodes[a]), int(nodes[b]))
        ]
        need = num_edges - len(tree_set)
        if need > len(extra):
            continue
        if need:
            picked = rng.choice(len(extra), size=need, replace=False)
            edges = sorted(tree_set) + [extra[k] for k in sorted(picked)]
        else:
            edges = sorted(tree_set)
        labels = graph.labels[nodes] if graph.is_labeled else None
        return from_edges(num_nodes, edges, labels)
    raise GenerationError(
        f"random walk did not yield {num_nodes} nodes with {num_edges} edges "
        f"after {max_restarts} restarts; try another seed"
    )


def erdos_renyi(n: int, p: float, seed=None) -> CsrGraph:
    """G(n, p) random graph."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return from_edges(n, np.column_stack([iu[keep], ju[keep]]))


def delaunay_graph(n: int, seed=None) -> CsrGraph:
    """Planar triangulation of ``n`` uniform random points in the unit square."""
    from scipy.spatial import Delaunay

    rng = np.random.default_rng(seed)
    tri = Delaunay(rng.random((n, 2)))
    s = tri.simplices
    edges = np.concatenate([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
    return from_edges(n, edges)


def chain_with_tails(length: int, tail_every: int = 2, tail_length: int = 1,
                     triangle_every: int = 0) -> CsrGraph:
    """Sparse road-like graph: a long path with dead-end side roads.

    Every ``tail_every``-th chain node gets a pendant path of ``tail_length``
    nodes.  With ``triangle_every`` > 0, a chord closing a triangle is added
    every that many chain positions, so a few matches exist.
    """
    edges = [(i, i + 1) for i in range(length - 1)]
    nxt = length
    for i in range(0, length, tail_every):
        prev = i
        for _ in range(tail_length):
            edges.append((prev, nxt))
            prev = nxt
            nxt += 1
    if triangle_every:
        for i in range(0, length - 2, triangle_every):
            edges.append((i, i + 2))
    return from_edges(nxt, edges)


def clique(k: int, labels=None) -> CsrGraph:
    return from_edges(k, [(i, j) for i in range(k) for j in range(i + 1, k)], labels)


def cycle(k: int, labels=None) -> CsrGraph:
    return from_edges(k, [(i, (i + 1) % k) for i in range(k)], labels)


def path(k: int, labels=None) -> CsrGraph:
    return from_edges(k, [(i, i + 1) for i in range(k - 1)], labels)


def star(leaves: int, labels=None) -> CsrGraph:
    return from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)], labels)

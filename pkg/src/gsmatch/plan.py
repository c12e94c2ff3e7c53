"""Query preprocessing: visit order, spanning tree and symmetry breaking.

Everything here runs once per query on the host before any data-graph work.
Unlabeled graphs behave as if every node carried label 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedQueryError
from .graph import CsrGraph, GraphStats

__all__ = [
    "NodeScore",
    "QueryPlan",
    "automorphisms",
    "compute_order",
    "compute_pf",
    "compute_query_ne",
    "symmetry_constraints",
]


@dataclass(frozen=True)
class NodeScore:
    """Ranking key of a query node at the moment it was selected."""

    d_M: int
    P_f: float
    deg: int


@dataclass(frozen=True)
class QueryPlan:
    """Precomputed matching schedule for one query.

    Positions index the visit order: ``order[i]`` is the query node matched in
    iteration ``i``.  ``parent[i]`` and the entries of ``non_tree[i]`` are
    earlier positions whose mapped data nodes must be adjacent to the one
    mapped at ``i``.  ``id_constraints[i]`` holds ``(j, rel)`` pairs: the data
    ID at ``i`` must be ``rel`` (``"<"`` or ``">"``) the data ID at ``j < i``.
    Per-node fields (``q_deg``, ``q_label``, ``q_ne``) are indexed by query
    node ID.
    """

    order: tuple[int, ...]
    parent: tuple[int, ...]
    non_tree: tuple[tuple[int, ...], ...]
    q_deg: tuple[int, ...]
    q_label: tuple[int, ...]
    q_ne: tuple[int, ...]
    id_constraints: tuple[tuple[tuple[int, str], ...], ...]
    scores: tuple[NodeScore, ...]
    neighbors: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.order)

    @property
    def position(self) -> tuple[int, ...]:
        pos = [0] * len(self.order)
        for i, u in enumerate(self.order):
            pos[u] = i
        return tuple(pos)

    def tree_edges(self) -> list[tuple[int, int]]:
        return [(self.order[self.parent[i]], self.order[i]) for i in range(1, self.size)]

    def query_edges(self) -> set[frozenset]:
        """Edge set rebuilt from the parent and non-tree links."""
        edges = {frozenset(e) for e in self.tree_edges()}
        for i, js in enumerate(self.non_tree):
            edges.update(frozenset((self.order[i], self.order[j])) for j in js)
        return edges

    def position_label(self, i: int) -> int:
        return self.q_label[self.order[i]]

    def position_deg(self, i: int) -> int:
        return self.q_deg[self.order[i]]

    def position_ne(self, i: int) -> int:
        return self.q_ne[self.order[i]]

    def later_neighbors(self, i: int) -> list[int]:
        """Positions after ``i`` whose query node is adjacent to ``order[i]``."""
        pos = self.position
        return sorted(pos[w] for w in self.neighbors[self.order[i]] if pos[w] > i)


def compute_query_ne(query: CsrGraph) -> np.ndarray:
    """Neighborhood encoding of each query node: sum of neighbor labels."""
    labels = query.label_array()
    return np.bincount(query.edge_sources, weights=labels[query.col_indices],
                       minlength=query.num_nodes).astype(np.int64)


def compute_pf(label: int, degree: int, stats: GraphStats, data_num_nodes: int | None = None) -> float:
    """Fraction of data nodes sharing ``label`` with degree >= ``degree``."""
    n = stats.num_nodes if data_num_nodes is None else data_num_nodes
    if n == 0:
        return 0.0
    return stats.count_compatible(label, degree) / n


def compute_order(query: CsrGraph, stats: GraphStats, symmetry: bool = True) -> QueryPlan:
    """Greedy visit order ranked by (d_M desc, P_f asc, deg desc, id asc).

    The first node has d_M = 0 like every other node, so it is picked by
    P_f and degree alone.  Each later node's spanning-tree parent is its
    earliest-ordered neighbor; its other ordered neighbors become non-tree
    links.
    """
    k = query.num_nodes
    if k == 0:
        raise ValueError("query graph has no nodes")
    deg = [int(d) for d in query.degrees]
    labels = [int(x) for x in query.label_array()]
    nbrs = tuple(tuple(int(w) for w in query.neighbors(u)) for u in range(k))
    pf = [compute_pf(labels[u], deg[u], stats) for u in range(k)]
    d_m = [0] * k
    placed = [False] * k
    order: list[int] = []
    scores: list[NodeScore] = []
    for step in range(k):
        best = None
        for u in range(k):
            if placed[u]:
                continue
            key = (-d_m[u], pf[u], -deg[u], u)
            if best is None or key < best[0]:
                best = (key, u)
        u = best[1]
        if step > 0 and d_m[u] == 0:
            raise DisconnectedQueryError(
                f"query node {u} is not connected to nodes {sorted(order)}"
            )
        order.append(u)
        scores.append(NodeScore(d_M=d_m[u], P_f=pf[u], deg=deg[u]))
        placed[u] = True
        for w in nbrs[u]:
            d_m[w] += 1

    pos = {u: i for i, u in enumerate(order)}
    parent = [-1]
    non_tree: list[tuple[int, ...]] = [()]
    for i in range(1, k):
        earlier = sorted(pos[w] for w in nbrs[order[i]] if pos[w] < i)
        parent.append(earlier[0])
        non_tree.append(tuple(earlier[1:]))

    id_cons: list[list[tuple[int, str]]] = [[] for _ in range(k)]
    if symmetry:
        for a, b in symmetry_constraints(query, order):
            pa, pb = pos[a], pos[b]
            # data(a) < data(b); attach the check to whichever is mapped later
            if pa < pb:
                id_cons[pb].append((pa, ">"))
            else:
                id_cons[pa].append((pb, "<"))

    return QueryPlan(
        order=tuple(order),
        parent=tuple(parent),
        non_tree=tuple(non_tree),
        q_deg=tuple(deg),
        q_label=tuple(labels),
        q_ne=tuple(int(x) for x in compute_query_ne(query)),
        id_constraints=tuple(tuple(sorted(c)) for c in id_cons),
        scores=tuple(scores),
        neighbors=nbrs,
    )


def _automorphism_search(query: CsrGraph, fixed: dict[int, int], first_only: bool):
    k = query.num_nodes
    labels = [int(x) for x in query.label_array()]
    deg = [int(d) for d in query.degrees]
    adj = [set(int(w) for w in query.neighbors(u)) for u in range(k)]
    perm = [-1] * k
    used = [False] * k
    out = []
    # pinned nodes first so contradictions surface early, then grow outwards
    # so every later node is checked against already-assigned neighbours
    seq = list(fixed)
    placed = set(seq)
    while len(seq) < k:
        touching = [u for u in range(k) if u not in placed and adj[u] & placed]
        nxt = max(touching, key=lambda u: (len(adj[u] & placed), -u)) if touching \
            else min(u for u in range(k) if u not in placed)
        seq.append(nxt)
        placed.add(nxt)

    def extend(t):
        if t == k:
            out.append(tuple(perm))
            return first_only
        u = seq[t]
        images = [fixed[u]] if u in fixed else range(k)
        for img in images:
            if used[img] or labels[img] != labels[u] or deg[img] != deg[u]:
                continue
            if any((perm[w] in adj[img]) != (w in adj[u]) for w in seq[:t]):
                continue
            perm[u] = img
            used[img] = True
            done = extend(t + 1)
            used[img] = False
            perm[u] = -1
            if done:
                return True
        return False

    extend(0)
    return out


def automorphisms(query: CsrGraph) -> list[tuple[int, ...]]:
    """All label-preserving automorphisms of a small graph.

    Backtracking over permutations, pruned by label, degree and adjacency
    to already-assigned nodes.  Each result maps node ``u`` to ``perm[u]``.
    """
    return sorted(_automorphism_search(query, {}, first_only=False))


def symmetry_constraints(query: CsrGraph, order=None) -> list[tuple[int, int]]:
    """Pairs ``(a, b)`` of query nodes requiring ``data(a) < data(b)``.

    Walks a stabilizer chain of the automorphism group: for each node ``u``
    (in ``order``), every other node in the orbit of ``u`` under the current
    subgroup must map to a larger data ID; the subgroup then shrinks to the
    stabilizer of ``u``.  Exactly one member of each automorphism class of
    embeddings satisfies the result.  Orbits are found by searching for a
    single witness automorphism per candidate image, never the whole group.
    """
    k = query.num_nodes
    order = list(range(k)) if order is None else list(order)
    fixed: dict[int, int] = {}
    pairs = []
    for u in order:
        for w in range(k):
            if w == u or w in fixed:
                continue
            if _automorphism_search(query, {**fixed, u: w}, first_only=True):
                pairs.append((u, w))
        fixed[u] = u
    return pairs

"""Reference matcher: plain depth-first backtracking.

Deliberately naive and self-contained so it can serve as ground truth for
the breadth-first matcher.  It shares no filtering, ordering or symmetry
code with :mod:`gsmatch.matcher` or :mod:`gsmatch.plan`; even the query's
automorphisms are found by running the backtracker on the query itself.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceededError
from .graph import CsrGraph

__all__ = ["CanonicalMatchSet", "brute_force_match", "enumerate_embeddings", "query_automorphisms"]

DEFAULT_BUDGET = 20_000_000


def _adjacency(g: CsrGraph) -> list[set[int]]:
    return [set(int(w) for w in g.neighbors(v)) for v in range(g.num_nodes)]


def _labels(g: CsrGraph) -> list[int]:
    if g.labels is None:
        return [1] * g.num_nodes
    return [int(x) for x in g.labels]


def _dfs_order(q_adj: list[set[int]]) -> list[int]:
    # Visit query nodes so that each one after the first touches an earlier one
    # whenever the query is connected.
    k = len(q_adj)
    order, seen = [], set()
    for root in range(k):
        if root in seen:
            continue
        stack = [root]
        while stack:
            u = stack.pop()
            if u in seen:
                continue
            seen.add(u)
            order.append(u)
            stack.extend(sorted(q_adj[u] - seen, reverse=True))
    return order


def enumerate_embeddings(graph: CsrGraph, query: CsrGraph, budget: int = DEFAULT_BUDGET):
    """Yield every injective, label- and edge-preserving map as a tuple indexed by query node."""
    g_adj = _adjacency(graph)
    q_adj = _adjacency(query)
    g_lab = _labels(graph)
    q_lab = _labels(query)
    k = query.num_nodes
    order = _dfs_order(q_adj)
    earlier = [[w for w in order[:t] if w in q_adj[order[t]]] for t in range(k)]
    assign = [-1] * k
    used: set[int] = set()
    expansions = 0

    def extend(t):
        nonlocal expansions
        if t == k:
            yield tuple(assign)
            return
        u = order[t]
        anchors = earlier[t]
        pool = g_adj[assign[anchors[0]]] if anchors else range(graph.num_nodes)
        for v in pool:
            expansions += 1
            if expansions > budget:
                raise BudgetExceededError(f"oracle exceeded {budget} node expansions")
            if v in used or g_lab[v] != q_lab[u]:
                continue
            if any(assign[w] not in g_adj[v] for w in anchors):
                continue
            assign[u] = v
            used.add(v)
            yield from extend(t + 1)
            used.discard(v)
            assign[u] = -1

    yield from extend(0)


def query_automorphisms(query: CsrGraph, budget: int = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """Automorphisms of ``query``: its embeddings into itself."""
    return sorted(enumerate_embeddings(query, query, budget))


@dataclass(frozen=True)
class CanonicalMatchSet:
    """Embeddings reduced to one representative per automorphism class.

    ``embeddings`` holds, for each class, the lexicographically smallest
    assignment tuple (indexed by query node) among its automorphic variants.
    """

    embeddings: frozenset
    automorphisms: tuple
    raw_count: int

    @property
    def count(self) -> int:
        return len(self.embeddings)

    def node_sets(self) -> set[frozenset]:
        return {frozenset(e) for e in self.embeddings}

    def canonicalize(self, assignment) -> tuple[int, ...]:
        return canonical_form(assignment, self.automorphisms)


def canonical_form(assignment, automorphisms) -> tuple[int, ...]:
    a = tuple(int(x) for x in assignment)
    return min(tuple(a[g[u]] for u in range(len(a))) for g in automorphisms)


def brute_force_match(graph: CsrGraph, query: CsrGraph, budget: int = DEFAULT_BUDGET) -> CanonicalMatchSet:
    """Exhaustive backtracking match, deduplicated by query automorphisms."""
    auts = tuple(query_automorphisms(query, budget))
    seen = set()
    raw = 0
    for emb in enumerate_embeddings(graph, query, budget):
        raw += 1
        seen.add(canonical_form(emb, auts))
    return CanonicalMatchSet(frozenset(seen), auts, raw)

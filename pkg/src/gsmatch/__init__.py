"""Breadth-first filtering-and-verification subgraph matching."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    DisconnectedQueryError,
    GenerationError,
    GraphParseError,
    GsmError,
    ResourceLimitError,
)
from .graph import CsrGraph, GraphStats, compute_stats, from_edges, load_edge_list, load_matrix_market
from .matcher import MatchConfig, MatchReport, match
from .oracle import brute_force_match
from .plan import QueryPlan, compute_order

__all__ = [
    "BudgetExceededError",
    "CsrGraph",
    "DisconnectedQueryError",
    "GenerationError",
    "GraphParseError",
    "GraphStats",
    "GsmError",
    "MatchConfig",
    "MatchReport",
    "QueryPlan",
    "ResourceLimitError",
    "brute_force_match",
    "compute_order",
    "compute_stats",
    "from_edges",
    "load_edge_list",
    "load_matrix_market",
    "match",
]

"""Reversible fixed-width packing of partial embeddings.

A row ``(v0, v1, ..., v_{L-1})`` over a graph with ``n`` nodes is stored as
the mixed-radix number ``v0 * n**(L-1) + ... + v_{L-1}``, which is
bijective for a fixed ``(L, n)`` so every stored row can be listed back
exactly.  Three storage tiers are used depending on ``L * ceil(log2 n)``:

* up to 64 bits: one ``uint64`` per row,
* up to 128 bits: one Python ``int`` per row (object array),
* beyond: explicit ``int64`` tuples, one column per position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PartialTable",
    "bits_per_id",
    "decode_row",
    "encode_row",
    "storage_kind",
]

PACKED64 = "packed64"
PACKED128 = "packed128"
TUPLES = "tuples"


def bits_per_id(num_data_nodes: int) -> int:
    return max(1, (int(num_data_nodes) - 1).bit_length())


def storage_kind(length: int, num_data_nodes: int) -> str:
    bits = length * bits_per_id(num_data_nodes)
    if bits <= 64:
        return PACKED64
    if bits <= 128:
        return PACKED128
    return TUPLES


def encode_row(row, num_data_nodes: int):
    """Pack a tuple of node IDs; returns an ``int`` or, past 128 bits, the tuple."""
    row = tuple(int(v) for v in row)
    for v in row:
        if not 0 <= v < num_data_nodes:
            raise ValueError(f"node id {v} outside [0, {num_data_nodes})")
    if storage_kind(len(row), num_data_nodes) == TUPLES:
        return row
    code = 0
    for v in row:
        code = code * num_data_nodes + v
    return code


def decode_row(code, length: int, num_data_nodes: int) -> tuple[int, ...]:
    if isinstance(code, tuple):
        return code
    code = int(code)
    out = [0] * length
    for k in range(length - 1, -1, -1):
        code, out[k] = divmod(code, num_data_nodes)
    return tuple(out)


def _decode_u64(codes: np.ndarray, length: int, n: int) -> np.ndarray:
    out = np.empty((len(codes), length), dtype=np.int64)
    rest = codes.astype(np.uint64, copy=True)
    base = np.uint64(n)
    for k in range(length - 1, -1, -1):
        out[:, k] = rest % base
        rest //= base
    return out


@dataclass
class PartialTable:
    """Contiguous table of partial embeddings after a verification step.

    ``length`` is the number of mapped positions per row (``iteration + 1``);
    ``advanced`` counts the extensions generated before they were filtered
    and compacted into this table.
    """

    rows: np.ndarray
    length: int
    num_data_nodes: int
    advanced: int = 0

    @property
    def iteration(self) -> int:
        return self.length - 1

    @property
    def kind(self) -> str:
        return storage_kind(self.length, self.num_data_nodes)

    @property
    def encoding_width(self) -> int:
        """Bits of storage per row."""
        kind = self.kind
        if kind == PACKED64:
            return 64
        if kind == PACKED128:
            return 128
        return 64 * self.length

    @property
    def storage_bits(self) -> int:
        return len(self) * self.encoding_width

    def __len__(self) -> int:
        return len(self.rows)

    @classmethod
    def from_columns(cls, cols: np.ndarray, num_data_nodes: int) -> "PartialTable":
        cols = np.asarray(cols, dtype=np.int64)
        if cols.ndim == 1:
            cols = cols[:, None]
        length = cols.shape[1]
        n = num_data_nodes
        kind = storage_kind(length, n)
        if kind == TUPLES:
            return cls(np.ascontiguousarray(cols), length, n)
        if kind == PACKED64:
            codes = np.zeros(len(cols), dtype=np.uint64)
            base = np.uint64(n)
            for k in range(length):
                codes = codes * base + cols[:, k].astype(np.uint64)
            return cls(codes, length, n)
        codes = np.zeros(len(cols), dtype=object)
        for k in range(length):
            codes = codes * n + cols[:, k].astype(object)
        return cls(codes, length, n)

    def columns(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Decode rows ``start:stop`` into an int64 array of shape (rows, length)."""
        part = self.rows[start:stop]
        n, length = self.num_data_nodes, self.length
        kind = self.kind
        if kind == TUPLES:
            return np.asarray(part, dtype=np.int64).reshape(-1, length)
        if kind == PACKED64:
            return _decode_u64(part, length, n)
        # Peel off groups of positions small enough for uint64 decoding.
        per_word = 64 // bits_per_id(n)
        pieces = []
        rest = part
        remaining = length
        while remaining:
            take = min(per_word, remaining)
            m = n ** take
            rest, low = rest // m, rest % m
            pieces.append(_decode_u64(np.asarray(low, dtype=np.uint64), take, n))
            remaining -= take
        if not pieces:
            return np.zeros((len(part), 0), dtype=np.int64)
        return np.hstack(pieces[::-1])

    def column(self, p: int) -> np.ndarray:
        """Decode only position ``p`` of every row."""
        kind = self.kind
        if kind == TUPLES:
            return np.asarray(self.rows[:, p], dtype=np.int64)
        n = self.num_data_nodes
        shift = n ** (self.length - 1 - p)
        if kind == PACKED64:
            return ((self.rows // np.uint64(shift)) % np.uint64(n)).astype(np.int64)
        return np.asarray((self.rows // shift) % n, dtype=np.int64)

    def decoded(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in r) for r in self.columns()]

    @classmethod
    def concat(cls, parts: list["PartialTable"], length: int, num_data_nodes: int) -> "PartialTable":
        kind = storage_kind(length, num_data_nodes)
        if not parts:
            if kind == TUPLES:
                empty = np.zeros((0, length), dtype=np.int64)
            else:
                empty = np.zeros(0, dtype=np.uint64 if kind == PACKED64 else object)
            return cls(empty, length, num_data_nodes)
        return cls(np.concatenate([p.rows for p in parts]), length, num_data_nodes)

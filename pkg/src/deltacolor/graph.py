"""Immutable simple undirected graph with integer vertex IDs 0..n-1."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import ValidationError

# Reserved "blank" color: means "no color chosen / not yet colored".
# Real colors are integers >= 1 and palettes never contain the blank.
BLANK = 0

ColorId = int

# Counts fit float32 exactly below 2**24, so BLAS matmuls stay exact for
# every graph we route through the dense path.
_DENSE_MATMUL_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected graph in CSR form (sorted neighbor lists, no loops).

    Instances are immutable and safe to share across threads; construct
    them via :func:`build_graph` so the invariants (symmetry, no self
    loops, no duplicates, correct ``max_degree``) are enforced.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    max_degree: int

    @property
    def num_edges(self) -> int:
        return self.indices.size // 2

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor IDs of ``v`` (a read-only view)."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def neighbor_set(self, v: int) -> set[int]:
        return set(int(w) for w in self.neighbors(v))

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = int(np.searchsorted(row, v))
        return i < row.size and int(row[i]) == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges as (u, v) pairs with u < v."""
        for u in range(self.n):
            for w in self.neighbors(u):
                if u < w:
                    yield u, int(w)

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = src < self.indices
        return np.column_stack((src[keep], self.indices[keep]))

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency; only sensible for moderate n."""
        a = np.zeros((self.n, self.n), dtype=bool)
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        a[src, self.indices] = True
        return a


def build_graph(edges: Iterable[tuple[int, int]] | np.ndarray, n: int | None = None) -> Graph:
    """Build a :class:`Graph` from an edge list.

    Pairs are normalized (order ignored) and deduplicated. Self-loops,
    negative IDs and IDs at or beyond a declared ``n`` are rejected.
    """
    if isinstance(edges, np.ndarray):
        arr = edges
        if arr.size == 0:
            arr = np.zeros((0, 2), dtype=np.int64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("edge array must have shape (m, 2)")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValidationError("edge array must hold integers")
        arr = arr.astype(np.int64, copy=False)
    else:
        rows = []
        for i, pair in enumerate(edges):
            try:
                u, v = pair
                u, v = int(u), int(v)
            except (TypeError, ValueError) as exc:
                raise ValidationError(f"edge #{i} is not a pair of integers: {pair!r}") from exc
            rows.append((u, v))
        arr = np.array(rows, dtype=np.int64).reshape(-1, 2)

    if arr.size and arr.min() < 0:
        raise ValidationError("vertex IDs must be nonnegative")
    if np.any(arr[:, 0] == arr[:, 1]):
        bad = int(arr[np.flatnonzero(arr[:, 0] == arr[:, 1])[0], 0])
        raise ValidationError(f"self-loop at vertex {bad}")

    inferred = int(arr.max()) + 1 if arr.size else 0
    if n is None:
        n = inferred
        if n == 0:
            raise ValidationError("cannot infer vertex count from an empty edge list; pass n")
    else:
        n = int(n)
        if n < 1:
            raise ValidationError("vertex count must be positive")
        if inferred > n:
            raise ValidationError(
                f"edge references vertex {inferred - 1} but only {n} vertices were declared"
            )

    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    if lo.size:
        # Dedupe via scalar keys; n < 2**31 keeps the key inside int64.
        keys = np.unique(lo * np.int64(n) + hi)
        lo = keys // n
        hi = keys % n

    src = np.concatenate((lo, hi))
    dst = np.concatenate((hi, lo))
    order = np.lexsort((dst, src))
    indices = dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices.setflags(write=False)
    indptr.setflags(write=False)
    max_degree = int(counts.max()) if n else 0
    return Graph(n=n, indptr=indptr, indices=indices, max_degree=max_degree)


def segment_sum(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Per-segment sum over a CSR layout; empty segments yield 0.

    reduceat is only fed the starts of non-empty segments: empty ones
    would otherwise swallow an element of the preceding segment.
    """
    m = indptr.size - 1
    sums = np.zeros(m, dtype=np.int64)
    if values.size == 0:
        return sums
    nonempty = np.diff(indptr) > 0
    sums[nonempty] = np.add.reduceat(values.astype(np.int64), indptr[:-1][nonempty])
    return sums


def segment_any(flags: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Per-segment OR over a CSR layout; empty segments yield False."""
    return segment_sum(flags, indptr) > 0

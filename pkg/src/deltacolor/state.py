"""Mutable partial-coloring state: residual palettes, degrees, surplus.

The state tracks, per vertex, the residual palette Pal(v), a tentative
color A(v), the committed color chi(v), the residual palette size Q(v)
and the residual degree d(v) (uncolored neighbors). The surplus
S(v) = Q(v) - d(v) never decreases under commits: a committed neighbor
always costs one degree and at most one palette entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvariantViolation, ValidationError
from .graph import BLANK, Graph, segment_sum


@dataclass(eq=False)
class ColoringState:
    """Single-writer partial-coloring state for one run on one graph.

    Palettes are stored as a boolean matrix over the distinct colors
    appearing in any palette (``color_values`` maps column -> color).
    ``tentative`` and ``committed`` hold color values, with 0 = blank.
    """

    graph: Graph
    color_values: np.ndarray
    original_palette: np.ndarray
    palette: np.ndarray
    tentative: np.ndarray
    committed: np.ndarray
    residual_palette_size: np.ndarray
    residual_degree: np.ndarray
    has_oversized_palettes: bool
    _value_to_index: dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def num_colors(self) -> int:
        return self.color_values.size

    def color_index(self, value: int) -> int:
        return self._value_to_index[value]

    def uncolored_mask(self) -> np.ndarray:
        return self.committed == BLANK

    def num_uncolored(self) -> int:
        return int(np.count_nonzero(self.committed == BLANK))

    def is_colored(self, v: int) -> bool:
        return self.committed[v] != BLANK

    def surplus(self) -> np.ndarray:
        """S(v) = Q(v) - d(v); meaningful for uncolored vertices."""
        return self.residual_palette_size - self.residual_degree

    def palette_of(self, v: int) -> set[int]:
        return set(int(c) for c in self.color_values[self.palette[v]])

    def original_palette_of(self, v: int) -> set[int]:
        return set(int(c) for c in self.color_values[self.original_palette[v]])

    def copy(self) -> "ColoringState":
        return ColoringState(
            graph=self.graph,
            color_values=self.color_values,
            original_palette=self.original_palette,
            palette=self.palette.copy(),
            tentative=self.tentative.copy(),
            committed=self.committed.copy(),
            residual_palette_size=self.residual_palette_size.copy(),
            residual_degree=self.residual_degree.copy(),
            has_oversized_palettes=self.has_oversized_palettes,
            _value_to_index=self._value_to_index,
        )


def init_state(graph: Graph, palettes: Sequence[Sequence[int]]) -> ColoringState:
    """Validate palettes and build a fresh state.

    Every palette must have at least max_degree + 1 colors, all >= 1
    (the blank 0 is reserved). Oversized palettes are accepted but
    flagged, because the good-color diagnostic is calibrated for
    palettes of exactly max_degree + 1 colors.
    """
    if len(palettes) != graph.n:
        raise ValidationError(f"expected {graph.n} palettes, got {len(palettes)}")
    need = graph.max_degree + 1

    canonical = all(
        isinstance(p, range) and p.start == 1 and p.step == 1 and p.stop == need + 1
        for p in palettes
    ) and graph.n > 0

    if canonical:
        values = np.arange(1, need + 1, dtype=np.int64)
        pal = np.ones((graph.n, need), dtype=bool)
        oversized = False
    else:
        universe: set[int] = set()
        cleaned: list[np.ndarray] = []
        oversized = False
        for v, p in enumerate(palettes):
            arr = np.unique(np.fromiter((int(c) for c in p), dtype=np.int64))
            if arr.size and arr[0] <= BLANK:
                bad = int(arr[arr <= BLANK][0])
                raise ValidationError(f"palette of vertex {v} contains reserved/invalid color {bad}")
            if arr.size < need:
                raise ValidationError(
                    f"palette of vertex {v} has {arr.size} colors, need at least {need}"
                )
            if arr.size > need:
                oversized = True
            universe.update(int(c) for c in arr)
            cleaned.append(arr)
        values = np.array(sorted(universe), dtype=np.int64)
        pal = np.zeros((graph.n, values.size), dtype=bool)
        for v, arr in enumerate(cleaned):
            pal[v, np.searchsorted(values, arr)] = True

    original = pal.copy()
    original.setflags(write=False)
    state = ColoringState(
        graph=graph,
        color_values=values,
        original_palette=original,
        palette=pal,
        tentative=np.zeros(graph.n, dtype=np.int64),
        committed=np.zeros(graph.n, dtype=np.int64),
        residual_palette_size=pal.sum(axis=1).astype(np.int64),
        residual_degree=graph.degrees().astype(np.int64),
        has_oversized_palettes=oversized,
        _value_to_index={int(c): i for i, c in enumerate(values)},
    )
    return state


def commit_colors(state: ColoringState, assignments: Mapping[int, int]) -> None:
    """Commit a batch of vertex -> color assignments.

    The batch must extend the current partial coloring properly and
    draw only from residual palettes. Violations raise
    :class:`InvariantViolation`: callers (the coloring steps) are
    supposed to pre-filter conflicts, so a bad batch is a bug, never
    something to skip silently.

    Committed vertices leave the residual graph: uncolored neighbors
    lose one residual degree and, if present, the committed color.
    """
    if not assignments:
        return
    graph = state.graph
    items = [(int(v), int(c)) for v, c in assignments.items()]

    for v, c in items:
        if not 0 <= v < graph.n:
            raise InvariantViolation(f"assignment to unknown vertex {v}")
        if state.committed[v] != BLANK:
            raise InvariantViolation(f"vertex {v} is already colored")
        idx = state._value_to_index.get(c)
        if idx is None or not state.palette[v, idx]:
            raise InvariantViolation(f"color {c} is not in the residual palette of vertex {v}")

    batch = np.zeros(graph.n, dtype=np.int64)
    for v, c in items:
        batch[v] = c
    for v, c in items:
        nb = graph.neighbors(v)
        if nb.size and np.any(batch[nb] == c):
            w = int(nb[np.flatnonzero(batch[nb] == c)[0]])
            raise InvariantViolation(f"vertices {v} and {w} are neighbors but both assigned color {c}")
        # A conflict with an already-committed neighbor is impossible here:
        # its color was removed from v's residual palette when it committed.

    for v, c in items:
        state.committed[v] = c
    for v, c in items:
        nb = graph.neighbors(v)
        live = nb[state.committed[nb] == BLANK]
        if live.size == 0:
            continue
        idx = state._value_to_index[c]
        had = state.palette[live, idx]
        state.residual_palette_size[live] -= had
        state.palette[live, idx] = False
        state.residual_degree[live] -= 1


def recompute_residuals(state: ColoringState) -> tuple[np.ndarray, np.ndarray]:
    """Recompute Q(v) and d(v) from scratch for every vertex.

    The values ignore each vertex's own commit status: Q counts original
    palette colors not held by any committed neighbor, d counts uncolored
    neighbors. For uncolored vertices these must equal the incrementally
    maintained fields.
    """
    graph = state.graph
    taken = np.zeros_like(state.original_palette)
    for v in np.flatnonzero(state.committed != BLANK):
        nb = graph.neighbors(v)
        taken[nb, state._value_to_index[int(state.committed[v])]] = True
    q = (state.original_palette & ~taken).sum(axis=1).astype(np.int64)
    uncolored = state.committed == BLANK
    d = segment_sum(uncolored[graph.indices], graph.indptr)
    return q, d

"""Verification helpers: properness, residual consistency, structure.

Every function returns a list of human-readable failure messages; an
empty list means the property holds. The engine records these in run
reports, the test suite asserts on them, and the CLI verify mode reuses
them against saved colorings.
"""

from __future__ import annotations

import numpy as np

from .graph import BLANK, Graph
from .state import ColoringState, recompute_residuals

_REPORT_CAP = 5


def properness_failures(graph: Graph, committed: np.ndarray) -> list[str]:
    """Monochromatic edges among committed vertices."""
    own = np.repeat(committed, graph.degrees())
    other = committed[graph.indices]
    bad = (own == other) & (own != BLANK)
    if not np.any(bad):
        return []
    src = np.repeat(np.arange(graph.n, dtype=np.int64), graph.degrees())
    out = []
    for i in np.flatnonzero(bad)[: 2 * _REPORT_CAP]:
        u, v = int(src[i]), int(graph.indices[i])
        if u < v:
            out.append(f"edge ({u}, {v}) is monochromatic with color {int(committed[u])}")
    return out[:_REPORT_CAP] or [
        f"{int(np.count_nonzero(bad)) // 2} monochromatic edges among committed vertices"
    ]


def residual_consistency_failures(graph: Graph, state: ColoringState) -> list[str]:
    """Incrementally maintained Q/d must match a from-scratch recount."""
    q, d = recompute_residuals(state)
    mask = state.committed == BLANK
    out = []
    bad_q = mask & (q != state.residual_palette_size)
    bad_d = mask & (d != state.residual_degree)
    for v in np.flatnonzero(bad_q)[:_REPORT_CAP]:
        out.append(
            f"vertex {int(v)}: maintained Q={int(state.residual_palette_size[v])}, recomputed {int(q[v])}"
        )
    for v in np.flatnonzero(bad_d)[:_REPORT_CAP]:
        out.append(
            f"vertex {int(v)}: maintained d={int(state.residual_degree[v])}, recomputed {int(d[v])}"
        )
    return out


def coloring_failures(
    graph: Graph, state: ColoringState, require_complete: bool = True
) -> list[str]:
    """Final-output check: complete, proper, and palette-respecting."""
    out = []
    uncolored = np.flatnonzero(state.committed == BLANK)
    if require_complete and uncolored.size:
        out.append(f"{uncolored.size} vertices left uncolored (first: {int(uncolored[0])})")
    colored = np.flatnonzero(state.committed != BLANK)
    for v in colored:
        idx = state._value_to_index.get(int(state.committed[v]))
        if idx is None or not state.original_palette[v, idx]:
            out.append(
                f"vertex {int(v)} wears color {int(state.committed[v])} outside its own palette"
            )
            if len(out) >= _REPORT_CAP:
                break
    out.extend(properness_failures(graph, state.committed))
    return out


def verify_coloring(
    graph: Graph, palettes, coloring: dict[int, int] | np.ndarray
) -> list[str]:
    """Check a saved coloring against a graph and its palettes."""
    colors = np.zeros(graph.n, dtype=np.int64)
    if isinstance(coloring, dict):
        for key, c in coloring.items():
            v = int(key)
            if not 0 <= v < graph.n:
                return [f"coloring references unknown vertex {v}"]
            colors[v] = int(c)
    else:
        arr = np.asarray(coloring, dtype=np.int64)
        if arr.shape != (graph.n,):
            return [f"coloring has {arr.size} entries for {graph.n} vertices"]
        colors = arr

    out = []
    palette_sets = [set(int(c) for c in p) for p in palettes]
    for v in range(graph.n):
        if colors[v] == BLANK:
            out.append(f"vertex {v} is uncolored")
        elif int(colors[v]) not in palette_sets[v]:
            out.append(f"vertex {v} wears color {int(colors[v])} outside its own palette")
        if len(out) >= _REPORT_CAP:
            break
    out.extend(properness_failures(graph, colors))
    return out


def decomposition_failures(graph: Graph, decomp) -> list[str]:
    """Structural validity: disjoint exhaustive parts, correct leaders,
    friend-edge connectivity of each almost-clique."""
    out = []
    n = graph.n
    seen = np.zeros(n, dtype=np.int64)
    seen[decomp.sparse] += 1
    for clique in decomp.cliques:
        seen[clique.members] += 1
    if np.any(seen != 1):
        v = int(np.flatnonzero(seen != 1)[0])
        out.append(f"vertex {v} appears in {int(seen[v])} parts of the decomposition")

    leaders = [c.leader for c in decomp.cliques]
    if len(set(leaders)) != len(leaders):
        out.append("leader IDs are not distinct across almost-cliques")
    for j, clique in enumerate(decomp.cliques):
        if clique.members.size == 0:
            out.append(f"almost-clique {j} is empty")
            continue
        if clique.leader != int(clique.members.min()):
            out.append(f"almost-clique {j}: leader {clique.leader} is not the smallest member")
        if np.any(decomp.membership[clique.members] != j):
            out.append(f"almost-clique {j}: membership array disagrees with member list")
        # Connectivity under friend edges restricted to this clique.
        members = set(int(v) for v in clique.members)
        stack = [int(clique.members[0])]
        reached = {stack[0]}
        while stack:
            u = stack.pop()
            for w in decomp.friend_graph.neighbors(u):
                w = int(w)
                if w in members and w not in reached:
                    reached.add(w)
                    stack.append(w)
        if len(reached) != len(members):
            out.append(f"almost-clique {j} is not connected under friend edges")
    return out


def decomposition_bound_failures(graph: Graph, decomp, metrics) -> list[str]:
    """Deterministic structure theorems; a violation always means a bug.

    external degree <= eps * max_degree, anti-degree <= 3 eps * max_degree,
    weak diameter <= 2, clique size <= (1 + 3 eps) * max_degree.
    """
    out = []
    eps = decomp.epsilon
    dmax = graph.max_degree
    tol = 1e-9
    for v, ext in metrics.external_degree.items():
        if ext > eps * dmax + tol:
            out.append(f"external degree of {v} is {ext} > eps*max_degree = {eps * dmax:.3f}")
    for v, a in metrics.anti_degree.items():
        if a > 3 * eps * dmax + tol:
            out.append(f"anti-degree of {v} is {a} > 3*eps*max_degree = {3 * eps * dmax:.3f}")
    for j, diam in enumerate(metrics.weak_diameter):
        if diam > 2:
            out.append(f"almost-clique {j} has weak diameter > 2")
    for j, size in enumerate(metrics.clique_size):
        if size > (1 + 3 * eps) * dmax + tol:
            out.append(
                f"almost-clique {j} has {size} members > (1+3*eps)*max_degree = {(1 + 3 * eps) * dmax:.3f}"
            )
    return out[:_REPORT_CAP * 4]

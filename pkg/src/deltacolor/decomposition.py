"""Decomposition of a graph into sparse vertices and almost-cliques.

Definitions, all relative to a density parameter eps in (0, 1/5):

* friend edge: an edge uv with |N(u) & N(v)| >= (1 - eps) * max_degree
* dense vertex: has at least (1 - eps) * max_degree friends
* almost-clique: a connected component of dense vertices under friend
  edges; its leader is the member with the smallest ID

The decomposition is computed once on the original graph and stays
fixed; restricting to uncolored vertices is a view applied by
:func:`structural_metrics`, never a recomputation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError
from .graph import _DENSE_MATMUL_LIMIT, BLANK, Graph, build_graph
from .state import ColoringState

# Threshold comparisons against (1 - eps) * max_degree use this slack so
# exact integer counts are not lost to float rounding at the boundary.
THRESHOLD_TOL = 1e-9

# Weak diameter report value meaning "more than 2"; any almost-clique
# with this value is a structural violation.
DIAMETER_EXCEEDED = 3


@dataclass(frozen=True, eq=False)
class AlmostClique:
    leader: int
    members: np.ndarray  # sorted vertex IDs


@dataclass(frozen=True, eq=False)
class Decomposition:
    epsilon: float
    friend_graph: Graph
    sparse: np.ndarray  # sorted sparse vertex IDs
    cliques: tuple[AlmostClique, ...]  # sorted by leader ID
    membership: np.ndarray  # clique index per vertex, -1 for sparse

    def friends(self, v: int) -> np.ndarray:
        return self.friend_graph.neighbors(v)

    def is_dense(self, v: int) -> bool:
        return self.membership[v] >= 0

    def num_dense(self) -> int:
        return int(np.count_nonzero(self.membership >= 0))

    def leader_by_vertex(self) -> np.ndarray:
        """Per-vertex leader ID of its almost-clique, -1 for sparse."""
        out = np.full(self.membership.size, -1, dtype=np.int64)
        for clique in self.cliques:
            out[clique.members] = clique.leader
        return out

    def same_as(self, other: "Decomposition") -> bool:
        if self.sparse.size != other.sparse.size or not np.array_equal(self.sparse, other.sparse):
            return False
        if not np.array_equal(self.membership >= 0, other.membership >= 0):
            return False
        if len(self.cliques) != len(other.cliques):
            return False
        for a, b in zip(self.cliques, other.cliques):
            if a.leader != b.leader or not np.array_equal(a.members, b.members):
                return False
        fa = self.friend_graph
        fb = other.friend_graph
        return np.array_equal(fa.indptr, fb.indptr) and np.array_equal(fa.indices, fb.indices)


@dataclass(frozen=True, eq=False)
class StructuralMetrics:
    """Per-vertex and per-clique structure, restricted to uncolored vertices.

    external_degree counts uncolored dense neighbors outside the vertex's
    own almost-clique (sparse neighbors never count). anti_degree counts
    uncolored non-neighbors inside the clique, the vertex itself excluded.
    Weak diameter is measured in the full original graph.
    """

    external_degree: dict[int, int]
    anti_degree: dict[int, int]
    weak_diameter: list[int]
    clique_size: list[int]


def _validate_epsilon(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.2:
        raise ValidationError(f"epsilon must be in (0, 1/5), got {epsilon}")
    return epsilon


def common_neighbor_counts(graph: Graph) -> np.ndarray:
    """Dense matrix of |N(u) & N(v)| for all pairs (n x n, int-valued)."""
    if graph.n > _DENSE_MATMUL_LIMIT:
        raise ValidationError(
            f"dense common-neighbor matrix only supported up to n={_DENSE_MATMUL_LIMIT}"
        )
    a = graph.adjacency_matrix().astype(np.float32)
    return a @ a.T


def compute_friend_edges(
    graph: Graph, epsilon: float, counts: np.ndarray | None = None
) -> Graph:
    """Friend edges of ``graph`` at density ``epsilon``, as a graph.

    An edge qualifies when its endpoints share at least
    (1 - eps) * max_degree neighbors. The returned graph has the same
    vertex set; its degrees are the per-vertex friend counts.

    ``counts`` may carry a precomputed common-neighbor matrix to avoid
    repeating the matrix product across epsilon values.
    """
    epsilon = _validate_epsilon(epsilon)
    n = graph.n
    threshold = (1.0 - epsilon) * graph.max_degree - THRESHOLD_TOL
    if graph.num_edges == 0:
        return build_graph(np.zeros((0, 2), dtype=np.int64), n=n)

    if counts is not None or n <= _DENSE_MATMUL_LIMIT:
        if counts is None:
            counts = common_neighbor_counts(graph)
        edges = graph.edge_array()
        keep = counts[edges[:, 0], edges[:, 1]] >= threshold
        friend_edges = edges[keep]
    else:
        rows = []
        for u, v in graph.edges():
            shared = np.intersect1d(graph.neighbors(u), graph.neighbors(v), assume_unique=True)
            if shared.size >= threshold:
                rows.append((u, v))
        friend_edges = np.array(rows, dtype=np.int64).reshape(-1, 2)
    return build_graph(friend_edges, n=n)


def classify_and_components(graph: Graph, friend_graph: Graph, epsilon: float) -> Decomposition:
    """Split vertices into sparse ones and almost-cliques.

    A vertex is dense when it has at least (1 - eps) * max_degree
    friends; almost-cliques are the connected components of the dense
    vertices under friend edges, each led by its smallest member ID.
    ``friend_graph`` must come from :func:`compute_friend_edges` at the
    same epsilon.
    """
    epsilon = _validate_epsilon(epsilon)
    n = graph.n
    membership = np.full(n, -1, dtype=np.int64)

    if graph.max_degree == 0:
        # Degenerate graphs have no triangles; everything is sparse.
        dense_mask = np.zeros(n, dtype=bool)
    else:
        threshold = (1.0 - epsilon) * graph.max_degree - THRESHOLD_TOL
        dense_mask = friend_graph.degrees() >= threshold

    dense_ids = np.flatnonzero(dense_mask)
    cliques: list[AlmostClique] = []
    if dense_ids.size:
        sub = csr_matrix(
            (
                np.ones(friend_graph.indices.size, dtype=np.int8),
                friend_graph.indices,
                friend_graph.indptr,
            ),
            shape=(n, n),
        )[dense_ids][:, dense_ids]
        _, labels = connected_components(sub, directed=False)
        for label in np.unique(labels):
            members = dense_ids[labels == label]
            cliques.append(AlmostClique(leader=int(members.min()), members=members))
        cliques.sort(key=lambda c: c.leader)
        for j, clique in enumerate(cliques):
            membership[clique.members] = j

    return Decomposition(
        epsilon=epsilon,
        friend_graph=friend_graph,
        sparse=np.flatnonzero(~dense_mask),
        cliques=tuple(cliques),
        membership=membership,
    )


def decompose(graph: Graph, epsilon: float, counts: np.ndarray | None = None) -> Decomposition:
    """Convenience wrapper: friend edges plus classification."""
    friend_graph = compute_friend_edges(graph, epsilon, counts=counts)
    return classify_and_components(graph, friend_graph, epsilon)


def structural_metrics(
    graph: Graph,
    decomp: Decomposition,
    state: ColoringState | None = None,
    counts: np.ndarray | None = None,
) -> StructuralMetrics:
    """External degrees, anti-degrees, weak diameters and clique sizes.

    With a ``state``, metrics cover only uncolored vertices (the
    residual view of each clique); distances for the weak diameter are
    always measured in the full original graph.
    """
    if state is not None:
        uncolored = state.committed == BLANK
    else:
        uncolored = np.ones(graph.n, dtype=bool)

    dense_uncolored = uncolored & (decomp.membership >= 0)
    external: dict[int, int] = {}
    anti: dict[int, int] = {}
    diameters: list[int] = []
    sizes: list[int] = []

    use_counts = counts
    if use_counts is None and graph.n <= _DENSE_MATMUL_LIMIT and decomp.cliques:
        largest = max(c.members.size for c in decomp.cliques)
        if largest > 64:
            use_counts = common_neighbor_counts(graph)
    adj_matrix = graph.adjacency_matrix() if use_counts is not None else None

    for j, clique in enumerate(decomp.cliques):
        members = clique.members[uncolored[clique.members]]
        sizes.append(int(members.size))
        for v in members:
            nb = graph.neighbors(v)
            live = nb[dense_uncolored[nb]]
            external[int(v)] = int(np.count_nonzero(decomp.membership[live] != j))
            inside = int(np.count_nonzero(np.isin(live, members, assume_unique=True))) if live.size else 0
            # np.isin over sorted unique arrays; v is never its own neighbor.
            anti[int(v)] = int(members.size) - 1 - inside
        diameters.append(_weak_diameter(graph, members, use_counts, adj_matrix))

    return StructuralMetrics(
        external_degree=external,
        anti_degree=anti,
        weak_diameter=diameters,
        clique_size=sizes,
    )


def _weak_diameter(
    graph: Graph,
    members: np.ndarray,
    counts: np.ndarray | None,
    adj_matrix: np.ndarray | None = None,
) -> int:
    """Max pairwise distance in the full graph, reported as min(dist, 3).

    Distances beyond 2 are all mapped to DIAMETER_EXCEEDED: the theory
    promises at most 2, so the exact larger value carries no information.
    """
    m = members.size
    if m <= 1:
        return 0
    if adj_matrix is not None:
        adj = adj_matrix[np.ix_(members, members)]
    else:
        adj = np.zeros((m, m), dtype=bool)
        for i, v in enumerate(members):
            adj[i] = np.isin(members, graph.neighbors(v), assume_unique=True)
    if counts is not None:
        within_two = adj | (counts[np.ix_(members, members)] > 0)
    else:
        within_two = adj.copy()
        pending = np.argwhere(~adj)
        for i, k in pending:
            if i >= k:
                continue
            shared = np.intersect1d(
                graph.neighbors(int(members[i])), graph.neighbors(int(members[k])), assume_unique=True
            )
            if shared.size:
                within_two[i, k] = within_two[k, i] = True
    off_diag = ~np.eye(m, dtype=bool)
    if not within_two[off_diag].all():
        return DIAMETER_EXCEEDED
    return 1 if adj[off_diag].all() else 2


def decomposition_to_dict(
    decomp: Decomposition, metrics: StructuralMetrics | None = None
) -> dict:
    """JSON-exportable form of a decomposition (plus optional metrics)."""
    out: dict = {
        "epsilon": decomp.epsilon,
        "sparse": [int(v) for v in decomp.sparse],
        "cliques": [
            {"leader": int(c.leader), "members": [int(v) for v in c.members]}
            for c in decomp.cliques
        ],
    }
    if metrics is not None:
        out["metrics"] = {
            "external_degree": {str(v): d for v, d in sorted(metrics.external_degree.items())},
            "anti_degree": {str(v): a for v, a in sorted(metrics.anti_degree.items())},
            "weak_diameter": list(metrics.weak_diameter),
            "clique_size": list(metrics.clique_size),
        }
    return out

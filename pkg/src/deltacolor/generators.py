"""Seeded graph generators and brute-force oracles for testing.

Generators are deterministic for a fixed spec and seed. The brute-force
decomposition is an independent implementation (plain Python sets and a
hand-rolled union-find) kept deliberately free of the optimized code
paths so it can serve as an oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decomposition import THRESHOLD_TOL, AlmostClique, Decomposition
from .errors import GenerationError, ValidationError
from .graph import _DENSE_MATMUL_LIMIT, Graph, build_graph

_BRUTE_FORCE_LIMIT = 500
_LOCALLY_SPARSE_ATTEMPTS = 50

GENERATOR_KINDS = ("complete", "gnp", "clique_chain", "bipartite_random", "locally_sparse")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValidationError(f"unknown generator kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "GeneratorSpec":
        """Parse compact CLI syntax, e.g. 'complete:21', 'gnp:100,0.5',
        'clique_chain:21x8', 'bipartite_random:100,0.3',
        'locally_sparse:200,0.5,0.3'."""
        kind, _, rest = text.partition(":")
        kind = kind.strip()
        rest = rest.strip()
        try:
            if kind == "complete":
                params = {"n": int(rest)}
            elif kind == "gnp":
                a, b = rest.split(",")
                params = {"n": int(a), "p": float(b)}
            elif kind == "clique_chain":
                a, b = rest.split("x")
                params = {"size": int(a), "count": int(b)}
            elif kind == "bipartite_random":
                a, b = rest.split(",")
                params = {"n": int(a), "p": float(b)}
            elif kind == "locally_sparse":
                a, b, c = rest.split(",")
                params = {"n": int(a), "p": float(b), "delta": float(c)}
            else:
                raise ValidationError(f"unknown generator kind {kind!r}")
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"malformed generator spec {text!r}") from exc
        return cls(kind=kind, params=params, seed=seed)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        try:
            return cls(
                kind=data["kind"],
                params={k: v for k, v in data.items() if k not in ("kind", "seed")},
                seed=int(data.get("seed", 0)),
            )
        except KeyError as exc:
            raise ValidationError(f"generator spec missing field: {exc}") from exc

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, **self.params}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _gnp_edges(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    rows, cols = np.triu_indices(n, k=1)
    keep = rng.random(rows.size) < p
    return np.column_stack((rows[keep], cols[keep])).astype(np.int64)


def generate(spec: GeneratorSpec) -> Graph:
    """Materialize a graph from a spec; deterministic per (spec, seed)."""
    kind = spec.kind
    params = spec.params
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))

    if kind == "complete":
        n = int(params["n"])
        _require(n >= 1, "complete graph needs n >= 1")
        rows, cols = np.triu_indices(n, k=1)
        return build_graph(np.column_stack((rows, cols)).astype(np.int64), n=n)

    if kind == "gnp":
        n, p = int(params["n"]), float(params["p"])
        _require(n >= 1, "gnp needs n >= 1")
        _require(0.0 < p < 1.0, "gnp needs 0 < p < 1")
        return build_graph(_gnp_edges(n, p, rng), n=n)

    if kind == "clique_chain":
        size, count = int(params["size"]), int(params["count"])
        _require(size >= 2 and count >= 1, "clique_chain needs size >= 2 and count >= 1")
        rows, cols = np.triu_indices(size, k=1)
        blocks = []
        for j in range(count):
            base = j * size
            blocks.append(np.column_stack((rows + base, cols + base)))
        edges = np.vstack(blocks).astype(np.int64)
        # One bridge per consecutive pair: last member of clique j to the
        # first member of clique j+1, so no vertex carries two bridges.
        bridges = np.array(
            [[j * size + size - 1, (j + 1) * size] for j in range(count - 1)], dtype=np.int64
        ).reshape(-1, 2)
        return build_graph(np.vstack((edges, bridges)), n=size * count)

    if kind == "bipartite_random":
        n, p = int(params["n"]), float(params["p"])
        _require(n >= 2, "bipartite_random needs n >= 2")
        _require(0.0 < p < 1.0, "bipartite_random needs 0 < p < 1")
        left = n // 2
        right = n - left
        mask = rng.random((left, right)) < p
        li, ri = np.nonzero(mask)
        return build_graph(np.column_stack((li, ri + left)).astype(np.int64), n=n)

    if kind == "locally_sparse":
        n, p, delta = int(params["n"]), float(params["p"]), float(params["delta"])
        _require(n >= 1, "locally_sparse needs n >= 1")
        _require(0.0 < p < 1.0, "locally_sparse needs 0 < p < 1")
        _require(0.0 < delta < 1.0, "locally_sparse needs 0 < delta < 1")
        for _ in range(_LOCALLY_SPARSE_ATTEMPTS):
            g = build_graph(_gnp_edges(n, p, rng), n=n)
            dmax = g.max_degree
            bound = (1.0 - delta) * dmax * (dmax - 1) / 2.0
            if np.all(neighborhood_edge_counts(g) <= bound + THRESHOLD_TOL):
                return g
        raise GenerationError(
            f"could not sample a (1-{delta})-locally-sparse graph with n={n}, p={p} "
            f"in {_LOCALLY_SPARSE_ATTEMPTS} attempts; lower p or delta"
        )

    raise ValidationError(f"unknown generator kind {kind!r}")


def neighborhood_edge_counts(graph: Graph) -> np.ndarray:
    """Number of edges inside G[N(v)] for every vertex v."""
    if graph.n <= _DENSE_MATMUL_LIMIT:
        a = graph.adjacency_matrix().astype(np.float32)
        common = a @ a.T
        return ((common * a).sum(axis=1) / 2.0).astype(np.int64)
    counts = np.zeros(graph.n, dtype=np.int64)
    for v in range(graph.n):
        nb = graph.neighbors(v)
        total = 0
        for w in nb:
            total += int(np.intersect1d(graph.neighbors(int(w)), nb, assume_unique=True).size)
        counts[v] = total // 2
    return counts


def is_locally_sparse(graph: Graph, delta: float) -> bool:
    """True when every neighborhood spans at most (1-delta) * C(max_degree, 2) edges."""
    dmax = graph.max_degree
    bound = (1.0 - delta) * dmax * (dmax - 1) / 2.0
    return bool(np.all(neighborhood_edge_counts(graph) <= bound + THRESHOLD_TOL))


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def brute_force_decomposition(graph: Graph, epsilon: float) -> Decomposition:
    """Oracle decomposition by direct definition chasing (small graphs only)."""
    if graph.n > _BRUTE_FORCE_LIMIT:
        raise ValidationError(f"brute-force oracle capped at n={_BRUTE_FORCE_LIMIT}")
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.2:
        raise ValidationError(f"epsilon must be in (0, 1/5), got {epsilon}")

    nsets = [graph.neighbor_set(v) for v in range(graph.n)]
    threshold = (1.0 - epsilon) * graph.max_degree - THRESHOLD_TOL
    friend_pairs = []
    friend_count = [0] * graph.n
    for u in range(graph.n):
        for v in nsets[u]:
            if u < v and len(nsets[u] & nsets[v]) >= threshold:
                friend_pairs.append((u, v))
                friend_count[u] += 1
                friend_count[v] += 1

    if graph.max_degree == 0:
        dense = set()
    else:
        dense = {v for v in range(graph.n) if friend_count[v] >= threshold}

    uf = _UnionFind(sorted(dense))
    for u, v in friend_pairs:
        if u in dense and v in dense:
            uf.union(u, v)
    groups: dict[int, list[int]] = {}
    for v in sorted(dense):
        groups.setdefault(uf.find(v), []).append(v)

    membership = np.full(graph.n, -1, dtype=np.int64)
    cliques = []
    for j, (root, members) in enumerate(sorted(groups.items())):
        arr = np.array(members, dtype=np.int64)
        cliques.append(AlmostClique(leader=int(arr.min()), members=arr))
        membership[arr] = j

    friend_graph = build_graph(
        np.array(friend_pairs, dtype=np.int64).reshape(-1, 2), n=graph.n
    )
    sparse = np.array(sorted(set(range(graph.n)) - dense), dtype=np.int64)
    return Decomposition(
        epsilon=epsilon,
        friend_graph=friend_graph,
        sparse=sparse,
        cliques=tuple(cliques),
        membership=membership,
    )

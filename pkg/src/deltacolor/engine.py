"""The randomized coloring engine.

Phases, in order, for a full run:

1. decompose the graph into sparse vertices and almost-cliques
2. initial coloring step: every vertex stays blank with probability
   99/100, otherwise tries a uniform palette color; a vertex keeps its
   try only if no neighbor drew the same color
3. dense coloring steps: each almost-clique draws a random permutation
   of its uncolored members; the first ceil(M * gamma) members pick
   tentative colors uniformly from their residual palette minus earlier
   picks in the same clique; a member keeps its pick unless some dense
   neighbor in a clique with a smaller leader ID picked the same color
4. fallback trial rounds (uniform pick, keep unless an uncolored
   neighbor picked the same color) for sparse vertices, then for
   whatever remains

The engine simulates at the information level: each clique's leader is
assumed to know its members' full state, so permutations and picks are
computed centrally. Round accounting charges fixed costs per phase
(3 for the decomposition's distance-3 topology gathering, 2 for the
initial step, 5 per dense step, 2 per fallback round); the constants
only affect reporting, never correctness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .checks import (
    coloring_failures,
    properness_failures,
    residual_consistency_failures,
)
from .decomposition import Decomposition, decompose
from .errors import InvariantViolation, ValidationError
from .graph import BLANK, Graph, segment_any, segment_sum
from .schedule import ACTIVATION_PROB, DEFAULT_K, ScheduleParams, build_schedule
from .state import ColoringState, commit_colors, init_state

DEFAULT_MAX_FALLBACK_ITERS = 500

ROUND_COST_DECOMPOSE = 3
ROUND_COST_INITIAL = 2
ROUND_COST_DENSE = 5
ROUND_COST_FALLBACK = 2

# ceil() guard against float products landing epsilon above an integer.
_CEIL_TOL = 1e-12


@dataclass
class StepStats:
    """Per-step accounting for run reports.

    ``de_colored`` counts vertices that drew a non-blank tentative color
    but lost it to a conflict. For dense steps ``initially_uncolored``
    counts clique members left outside the permutation prefix; for the
    initial step it counts blank draws. ``palette_exhausted`` counts
    prefix vertices skipped because earlier picks consumed their whole
    residual palette (impossible while the regularity conditions hold).
    """

    kind: str
    colored: int = 0
    de_colored: int = 0
    initially_uncolored: int = 0
    palette_exhausted: int = 0
    surplus_min: int | None = None
    surplus_mean: float | None = None
    rounds: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "colored": self.colored,
            "de_colored": self.de_colored,
            "initially_uncolored": self.initially_uncolored,
            "palette_exhausted": self.palette_exhausted,
            "surplus_min": self.surplus_min,
            "surplus_mean": self.surplus_mean,
            "rounds": self.rounds,
        }


@dataclass(frozen=True, eq=False)
class GoodColorDiag:
    """Good-color diagnostic after the initial step.

    A color c is good for v when its count among committed neighbors is
    at least 1 + [c in Pal(v)]: one such neighbor outside the palette
    frees a degree, two sharing an in-palette color free two degrees for
    one palette entry. Either way the surplus grows, so
    s0 >= good_counts holds pointwise with certainty.

    q0/d0/s0 are the post-initial-step palette size, degree and surplus,
    evaluated for every vertex regardless of its own commit status. The
    calibration assumes palettes of size exactly max_degree + 1;
    ``oversized_palettes`` flags inputs where that is not the case.
    """

    good_counts: np.ndarray
    q0: np.ndarray
    d0: np.ndarray
    s0: np.ndarray
    oversized_palettes: bool


@dataclass(eq=False)
class DenseStepResult:
    stats: StepStats
    in_prefix: np.ndarray  # this step's permutation prefix, incl. skipped
    skipped: np.ndarray  # prefix vertices whose in-step palette was empty


@dataclass(eq=False)
class FallbackResult:
    steps: list[StepStats]
    exhausted: bool


@dataclass(eq=False)
class RunReport:
    seed: int
    n: int
    delta: int
    epsilon: float
    k: float
    main_path: bool
    forced_main_path: bool
    rounds_used: int
    steps: list[StepStats]
    schedule: ScheduleParams
    invariant_failures: list[str]
    coloring: np.ndarray
    dense_steps_executed: int
    invariants_checked: bool
    good_color: GoodColorDiag | None = None

    @property
    def complete(self) -> bool:
        return bool(np.all(self.coloring != BLANK))

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "K": self.k,
            "main_path": self.main_path,
            "forced_main_path": self.forced_main_path,
            "rounds_used": self.rounds_used,
            "dense_steps_executed": self.dense_steps_executed,
            "complete": self.complete,
            "steps": [s.to_dict() for s in self.steps],
            "invariant_failures": list(self.invariant_failures),
            "schedule": self.schedule.to_dict(),
            "coloring": {str(v): int(c) for v, c in enumerate(self.coloring)},
        }


def _ceil_frac(x: float) -> int:
    return int(math.ceil(x - _CEIL_TOL))


def _conflicted(graph: Graph, tentative: np.ndarray) -> np.ndarray:
    """True where some neighbor holds the same non-blank tentative color."""
    own = np.repeat(tentative, graph.degrees())
    eq = (own == tentative[graph.indices]) & (own != BLANK)
    return segment_any(eq, graph.indptr)


def _uniform_pick(state: ColoringState, v: int, rng: np.random.Generator) -> int:
    choices = np.flatnonzero(state.palette[v])
    if choices.size == 0:
        raise InvariantViolation(f"vertex {v} has an empty residual palette")
    return int(state.color_values[choices[int(rng.integers(choices.size))]])


def apply_initial_tentative(
    graph: Graph, state: ColoringState, tentative: np.ndarray
) -> StepStats:
    """Conflict resolution and commit for given initial-step draws.

    A vertex commits its tentative color iff the color is non-blank and
    no neighbor (of any kind) drew the same one; conflicts de-color both
    sides. Split out from the random draw so tests can inject colors.
    """
    tentative = np.asarray(tentative, dtype=np.int64)
    if tentative.shape != (graph.n,):
        raise ValidationError("tentative array must have one entry per vertex")
    for v in np.flatnonzero(tentative != BLANK):
        idx = state._value_to_index.get(int(tentative[v]))
        if idx is None or not state.palette[v, idx]:
            raise ValidationError(
                f"injected color {int(tentative[v])} is not in the palette of vertex {v}"
            )
    conflicted = _conflicted(graph, tentative)
    winners = np.flatnonzero((tentative != BLANK) & ~conflicted)
    commit_colors(state, {int(v): int(tentative[v]) for v in winners})
    state.tentative = tentative
    return StepStats(
        kind="initial",
        colored=int(winners.size),
        de_colored=int(np.count_nonzero((tentative != BLANK) & conflicted)),
        initially_uncolored=int(np.count_nonzero(tentative == BLANK)),
        rounds=ROUND_COST_INITIAL,
    )


def initial_coloring_step(
    graph: Graph, state: ColoringState, rng: np.random.Generator
) -> StepStats:
    """One synchronous initial coloring step on a fresh state.

    Each vertex independently stays blank with probability 99/100 and
    otherwise draws uniformly from its palette; non-conflicting draws
    are committed.
    """
    if np.any(state.committed != BLANK):
        raise ValidationError("initial coloring step requires a fresh state")
    draws = rng.random(graph.n)
    tentative = np.zeros(graph.n, dtype=np.int64)
    for v in np.flatnonzero(draws < ACTIVATION_PROB):
        tentative[v] = _uniform_pick(state, int(v), rng)
    return apply_initial_tentative(graph, state, tentative)


def count_good_colors(
    graph: Graph, pre_step_state: ColoringState, post_step_state: ColoringState
) -> GoodColorDiag:
    """Good-color diagnostic comparing pre/post initial-step states."""
    n = graph.n
    committed = post_step_state.committed
    values = post_step_state.color_values
    good = np.zeros(n, dtype=np.int64)
    for v in range(n):
        nb = graph.neighbors(v)
        cc = committed[nb]
        cc = cc[cc != BLANK]
        if cc.size == 0:
            continue
        uniq, cnt = np.unique(cc, return_counts=True)
        in_pal = pre_step_state.palette[v, np.searchsorted(values, uniq)]
        good[v] = int(np.count_nonzero(cnt >= 1 + in_pal))

    taken = np.zeros_like(post_step_state.original_palette)
    for v in np.flatnonzero(committed != BLANK):
        taken[graph.neighbors(v), post_step_state.color_index(int(committed[v]))] = True
    q0 = (post_step_state.original_palette & ~taken).sum(axis=1).astype(np.int64)
    d0 = segment_sum(committed[graph.indices] == BLANK, graph.indptr)
    return GoodColorDiag(
        good_counts=good,
        q0=q0,
        d0=d0,
        s0=q0 - d0,
        oversized_palettes=post_step_state.has_oversized_palettes,
    )


def _select_dense_tentative(
    state: ColoringState,
    decomp: Decomposition,
    gamma: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Leader-simulated selection phase of one dense step.

    Returns (tentative, in_prefix, skipped, initially_uncolored). Each
    clique gets its own RNG stream spawned from ``rng`` so per-clique
    work is reproducible and could run in parallel.
    """
    n = state.graph.n
    tentative = np.zeros(n, dtype=np.int64)
    in_prefix = np.zeros(n, dtype=bool)
    skipped = np.zeros(n, dtype=bool)
    initially_uncolored = 0

    streams = rng.spawn(len(decomp.cliques))
    for clique, stream in zip(decomp.cliques, streams):
        residual = clique.members[state.committed[clique.members] == BLANK]
        m = residual.size
        if m == 0:
            continue
        perm = stream.permutation(residual)
        prefix_len = min(m, _ceil_frac(m * gamma))
        initially_uncolored += m - prefix_len
        used = np.zeros(state.num_colors, dtype=bool)
        for v in perm[:prefix_len]:
            v = int(v)
            in_prefix[v] = True
            avail = state.palette[v] & ~used
            choices = np.flatnonzero(avail)
            if choices.size == 0:
                skipped[v] = True
                continue
            idx = int(choices[int(stream.integers(choices.size))])
            used[idx] = True
            tentative[v] = int(state.color_values[idx])
    return tentative, in_prefix, skipped, initially_uncolored


def apply_dense_tentative(
    graph: Graph,
    state: ColoringState,
    decomp: Decomposition,
    tentative: np.ndarray,
    in_prefix: np.ndarray | None = None,
    skipped: np.ndarray | None = None,
    initially_uncolored: int = 0,
) -> DenseStepResult:
    """Conflict resolution and commit for given dense-step draws.

    A vertex is de-colored iff some dense neighbor in a clique with a
    strictly smaller leader ID drew the same tentative color; the check
    runs against tentative colors, so a vertex that itself loses to a
    third clique still de-colors its larger-leader neighbors. Sparse
    neighbors never de-color anyone. Intra-clique tentative colors are
    asserted pairwise distinct (the selection rule forces this).
    """
    tentative = np.asarray(tentative, dtype=np.int64)
    if tentative.shape != (graph.n,):
        raise ValidationError("tentative array must have one entry per vertex")
    if in_prefix is None:
        in_prefix = tentative != BLANK
    if skipped is None:
        skipped = np.zeros(graph.n, dtype=bool)

    for v in np.flatnonzero(tentative != BLANK):
        v = int(v)
        if decomp.membership[v] < 0:
            raise ValidationError(f"sparse vertex {v} cannot participate in a dense step")
        if state.committed[v] != BLANK:
            raise ValidationError(f"vertex {v} is already colored")
        idx = state._value_to_index.get(int(tentative[v]))
        if idx is None or not state.palette[v, idx]:
            raise ValidationError(
                f"injected color {int(tentative[v])} is not in the palette of vertex {v}"
            )

    for clique in decomp.cliques:
        vals = tentative[clique.members]
        vals = vals[vals != BLANK]
        if np.unique(vals).size != vals.size:
            raise InvariantViolation(
                f"duplicate tentative colors inside the almost-clique led by {clique.leader}"
            )

    leader_of = decomp.leader_by_vertex()
    de_colored = np.zeros(graph.n, dtype=bool)
    candidates = np.flatnonzero(tentative != BLANK)
    for v in candidates:
        v = int(v)
        nb = graph.neighbors(v)
        clash = (tentative[nb] == tentative[v]) & (leader_of[nb] >= 0) & (leader_of[nb] < leader_of[v])
        if clash.any():
            de_colored[v] = True

    winners = candidates[~de_colored[candidates]]
    commit_colors(state, {int(v): int(tentative[v]) for v in winners})
    state.tentative = tentative
    stats = StepStats(
        kind="dense",
        colored=int(winners.size),
        de_colored=int(np.count_nonzero(de_colored)),
        initially_uncolored=initially_uncolored,
        palette_exhausted=int(np.count_nonzero(skipped)),
        rounds=ROUND_COST_DENSE,
    )
    return DenseStepResult(stats=stats, in_prefix=in_prefix, skipped=skipped)


def dense_coloring_step(
    graph: Graph,
    state: ColoringState,
    decomp: Decomposition,
    gamma: float,
    rng: np.random.Generator,
) -> DenseStepResult:
    """One dense coloring step over all almost-cliques.

    ``gamma`` in [0, 1] sets the prefix fraction: in each clique only the
    first ceil(M * gamma) members of a fresh random permutation of the M
    uncolored members try a color this step.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValidationError(f"gamma must lie in [0, 1], got {gamma}")
    tentative, in_prefix, skipped, initially_uncolored = _select_dense_tentative(
        state, decomp, gamma, rng
    )
    return apply_dense_tentative(
        graph, state, decomp, tentative, in_prefix, skipped, initially_uncolored
    )


def fallback_round(
    graph: Graph,
    state: ColoringState,
    rng: np.random.Generator,
    eligible: np.ndarray | None = None,
) -> StepStats:
    """One trial round: uniform pick from the residual palette, keep it
    unless an uncolored neighbor picked the same color."""
    mask = state.committed == BLANK
    if eligible is not None:
        mask &= eligible
    tentative = np.zeros(graph.n, dtype=np.int64)
    for v in np.flatnonzero(mask):
        tentative[v] = _uniform_pick(state, int(v), rng)
    conflicted = _conflicted(graph, tentative)
    winners = np.flatnonzero((tentative != BLANK) & ~conflicted)
    commit_colors(state, {int(v): int(tentative[v]) for v in winners})
    state.tentative = tentative
    return StepStats(
        kind="fallback",
        colored=int(winners.size),
        de_colored=int(np.count_nonzero((tentative != BLANK) & conflicted)),
        rounds=ROUND_COST_FALLBACK,
    )


def fallback_coloring(
    graph: Graph,
    state: ColoringState,
    rng: np.random.Generator,
    max_iters: int = DEFAULT_MAX_FALLBACK_ITERS,
    eligible: np.ndarray | None = None,
    after_round: Callable[[StepStats], None] | None = None,
) -> FallbackResult:
    """Trial rounds until every eligible vertex is colored.

    Surplus at least 1 keeps every residual palette non-empty, so the
    loop terminates with probability 1; ``max_iters`` bounds the worst
    case and exhaustion is reported explicitly, never swallowed.
    """
    if max_iters < 0:
        raise ValidationError("max_iters must be nonnegative")
    steps: list[StepStats] = []

    def remaining() -> int:
        mask = state.committed == BLANK
        if eligible is not None:
            mask &= eligible
        return int(np.count_nonzero(mask))

    for _ in range(max_iters):
        if remaining() == 0:
            return FallbackResult(steps=steps, exhausted=False)
        stats = fallback_round(graph, state, rng, eligible)
        steps.append(stats)
        if after_round is not None:
            after_round(stats)
    return FallbackResult(steps=steps, exhausted=remaining() > 0)


class _InvariantMonitor:
    """Runs the per-commit checks and accumulates failure messages."""

    def __init__(self, graph: Graph, state: ColoringState, enabled: bool):
        self.graph = graph
        self.state = state
        self.enabled = enabled
        self.failures: list[str] = []
        self._prev_surplus = state.surplus().copy()
        self._prev_uncolored = state.uncolored_mask().copy()

    def after_step(self, tag: str) -> None:
        if not self.enabled:
            return
        still = self.state.uncolored_mask() & self._prev_uncolored
        drop = still & (self.state.surplus() < self._prev_surplus)
        if np.any(drop):
            v = int(np.flatnonzero(drop)[0])
            self.failures.append(f"{tag}: surplus of uncolored vertex {v} decreased")
        self.failures.extend(f"{tag}: {msg}" for msg in properness_failures(self.graph, self.state.committed))
        self.failures.extend(
            f"{tag}: {msg}" for msg in residual_consistency_failures(self.graph, self.state)
        )
        self._prev_surplus = self.state.surplus().copy()
        self._prev_uncolored = self.state.uncolored_mask().copy()


def run(
    graph: Graph,
    palettes: Sequence[Sequence[int]],
    k: float = DEFAULT_K,
    seed: int = 0,
    epsilon: float | None = None,
    force_main_path: bool = False,
    max_fallback_iters: int = DEFAULT_MAX_FALLBACK_ITERS,
    check_invariants: bool = True,
) -> RunReport:
    """Full coloring run; returns a report with per-step accounting.

    When the activation gate eps^4 * max_degree >= K ln n fails (which
    it does for every desk-scale input under the density formula), the
    whole graph goes straight to the fallback; ``force_main_path``
    overrides the routing so the decomposition and dense machinery can
    be exercised, usually together with an epsilon override.
    """
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    state = init_state(graph, palettes)
    sched = build_schedule(max(graph.max_degree, 1), graph.n, k, epsilon=epsilon)
    root = np.random.default_rng(np.random.SeedSequence(seed))
    monitor = _InvariantMonitor(graph, state, check_invariants)
    steps: list[StepStats] = []
    rounds_used = 0
    dense_steps_executed = 0
    good: GoodColorDiag | None = None
    decomp: Decomposition | None = None

    use_dense_path = (sched.main_path or force_main_path) and graph.max_degree >= 1

    def next_stream() -> np.random.Generator:
        return root.spawn(1)[0]

    def finish_step(stats: StepStats) -> None:
        _fill_surplus(stats, state, decomp)
        steps.append(stats)
        monitor.after_step(f"step {len(steps)} ({stats.kind})")

    if use_dense_path:
        decomp = decompose(graph, sched.epsilon)
        steps.append(StepStats(kind="decompose", rounds=ROUND_COST_DECOMPOSE))
        rounds_used += ROUND_COST_DECOMPOSE

        pre = state.copy()
        stats = initial_coloring_step(graph, state, next_stream())
        rounds_used += stats.rounds
        finish_step(stats)
        good = count_good_colors(graph, pre, state)
        if np.any(good.s0 < good.good_counts):
            v = int(np.flatnonzero(good.s0 < good.good_counts)[0])
            monitor.failures.append(
                f"good-color bound violated at vertex {v}: s0={int(good.s0[v])} < |J|={int(good.good_counts[v])}"
            )

        limit = min(sched.num_dense_rounds, sched.regularity_horizon)
        for i in range(1, limit + 1):
            row = sched.rounds[i]
            assert row.gamma is not None
            if row.gamma < 0.0:
                break
            prev = sched.rounds[i - 1]
            q_pre = state.residual_palette_size.copy()
            result = dense_coloring_step(graph, state, decomp, row.gamma, next_stream())
            rounds_used += result.stats.rounds
            dense_steps_executed += 1
            finish_step(result.stats)
            _check_palette_floor(monitor, decomp, result, q_pre, prev.d, prev.z, i)

        sparse_mask = np.zeros(graph.n, dtype=bool)
        sparse_mask[decomp.sparse] = True
        for phase, mask in (("sparse", sparse_mask), ("residual", None)):
            fb = fallback_coloring(
                graph,
                state,
                next_stream(),
                max_iters=max_fallback_iters,
                eligible=mask,
                after_round=finish_step,
            )
            rounds_used += ROUND_COST_FALLBACK * len(fb.steps)
            if fb.exhausted:
                monitor.failures.append(
                    f"fallback ({phase} phase) exhausted after {max_fallback_iters} rounds "
                    f"with {state.num_uncolored()} vertices uncolored"
                )
    else:
        fb = fallback_coloring(
            graph,
            state,
            next_stream(),
            max_iters=max_fallback_iters,
            after_round=finish_step,
        )
        rounds_used += ROUND_COST_FALLBACK * len(fb.steps)
        if fb.exhausted:
            monitor.failures.append(
                f"fallback exhausted after {max_fallback_iters} rounds "
                f"with {state.num_uncolored()} vertices uncolored"
            )

    monitor.failures.extend(coloring_failures(graph, state))
    total_colored = sum(s.colored for s in steps)
    if total_colored != graph.n - state.num_uncolored():
        monitor.failures.append(
            f"per-step colored counts sum to {total_colored}, "
            f"but {graph.n - state.num_uncolored()} vertices are colored"
        )

    return RunReport(
        seed=seed,
        n=graph.n,
        delta=graph.max_degree,
        epsilon=sched.epsilon,
        k=sched.k,
        main_path=sched.main_path,
        forced_main_path=force_main_path and not sched.main_path,
        rounds_used=rounds_used,
        steps=steps,
        schedule=sched,
        invariant_failures=monitor.failures,
        coloring=state.committed.copy(),
        dense_steps_executed=dense_steps_executed,
        invariants_checked=check_invariants,
        good_color=good,
    )


def _fill_surplus(stats: StepStats, state: ColoringState, decomp: Decomposition | None) -> None:
    """Surplus min/mean over the uncolored sparse vertices (all uncolored
    vertices when no decomposition is in play)."""
    mask = state.uncolored_mask()
    if decomp is not None:
        sparse_mask = np.zeros(mask.size, dtype=bool)
        sparse_mask[decomp.sparse] = True
        mask &= sparse_mask
    if not np.any(mask):
        return
    surplus = state.surplus()[mask]
    stats.surplus_min = int(surplus.min())
    stats.surplus_mean = float(surplus.mean())


def _check_palette_floor(
    monitor: _InvariantMonitor,
    decomp: Decomposition,
    result: DenseStepResult,
    q_pre: np.ndarray,
    d_bound: float,
    z_bound: float,
    step_index: int,
) -> None:
    """Palette floor of a regular dense step: every prefix vertex must
    satisfy Q(v) - L_j >= Z sqrt(delta) + D for its clique's prefix L_j."""
    if not monitor.enabled:
        return
    delta = d_bound / z_bound
    floor = z_bound * math.sqrt(delta) + d_bound
    for clique in decomp.cliques:
        prefix = clique.members[result.in_prefix[clique.members]]
        if prefix.size == 0:
            continue
        lj = int(prefix.size)
        short = prefix[q_pre[prefix] - lj < floor - 1e-9]
        if short.size:
            v = int(short[0])
            monitor.failures.append(
                f"dense step {step_index}: palette floor violated at vertex {v}: "
                f"Q={int(q_pre[v])}, L={lj}, floor={floor:.3f}"
            )

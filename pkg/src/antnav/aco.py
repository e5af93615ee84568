"""Ant colony solver with a positive attraction trail and a negative no-entry trail.

Ants build tours with the Ant Colony System pseudo-random proportional rule.
The weight of moving from ``i`` to ``j`` is::

    tau_pos[i, j] ** alpha * eta[i, j] ** beta * (1 + tau_neg[i, j]) ** -gamma

with ``eta = 1 / cost``. After each iteration the edges of the worst tour
that the best tour does not use receive negative pheromone, which makes
them less attractive in later iterations. Negative pheromone is clamped at
``tau_neg_max`` so no edge is ever fully forbidden.

Positive evaporation follows classical ACS by default (``evaporation="acs"``):
only the best-so-far tour's edges evaporate and receive the deposit, so
untouched edges keep their level and stay reachable. ``evaporation="global"``
evaporates every edge each iteration instead. The negative trail always
evaporates everywhere.

With ``baseline=True`` the solver runs plain ACS: it ignores the negative
term and never deposits negative pheromone. A variant with ``gamma=0`` and
``neg_deposit=0`` follows the same trajectory bit for bit.

Random numbers: each (seed, iteration, ant) triple seeds its own
``numpy`` PCG64 stream through ``SeedSequence``. An ant draws ``2n - 1``
uniforms up front, in this order: ``u[0]`` picks the start city; for step
``k >= 1`` ``u[2k-1]`` decides exploit vs. explore and ``u[2k]`` drives the
roulette wheel. Every step consumes both draws, so the layout does not
depend on the branch taken.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np
from numba import njit

from .qanalysis import DistanceMatrix
from .tsp import Tour, TspInstance, nearest_neighbour, tour_length

__all__ = [
    "SolverConfig",
    "PheromoneField",
    "SolverState",
    "SolveResult",
    "CycleResult",
    "init_solver",
    "ant_rng",
    "transition_weights",
    "transition_probabilities",
    "construct_tour",
    "apply_local_update",
    "update_pheromones",
    "run",
    "cycle_corpus",
    "coherence_score",
]

ZERO_COST_EPS = 1e-9
# Keeps tau_pos strictly positive when long runs evaporate untouched edges.
TAU_FLOOR = 1e-300
UINT64_MASK = (1 << 64) - 1
EVAPORATION_MODES = ("acs", "global")


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters. ``ants=None`` means one ant per city."""

    ants: int | None = None
    alpha: float = 1.0
    beta: float = 2.0
    gamma: float = 1.0
    rho_pos: float = 0.1
    rho_neg: float = 0.05
    q0: float = 0.9
    neg_deposit: float = 1.0
    tau_neg_max: float = 10.0
    iterations: int = 1000
    seed: int = 0
    baseline: bool = False
    target: float | None = None
    evaporation: str = "acs"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.ants is not None and (not isinstance(self.ants, int) or self.ants < 1):
            raise ValueError(f"ants must be a positive integer, got {self.ants!r}")
        for name in ("alpha", "beta", "gamma", "neg_deposit"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        for name in ("rho_pos", "rho_neg"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {getattr(self, name)!r}")
        if not 0 <= self.q0 <= 1:
            raise ValueError(f"q0 must lie in [0, 1], got {self.q0!r}")
        if not self.tau_neg_max > 0:
            raise ValueError(f"tau_neg_max must be > 0, got {self.tau_neg_max!r}")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")
        if not isinstance(self.seed, int) or not -(1 << 63) <= self.seed < (1 << 64):
            raise ValueError(f"seed must be a 64-bit integer, got {self.seed!r}")
        if self.target is not None and not self.target > 0:
            raise ValueError(f"target must be > 0, got {self.target!r}")
        if self.evaporation not in EVAPORATION_MODES:
            raise ValueError(f"evaporation must be one of {EVAPORATION_MODES}, got {self.evaporation!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ValueError(f"workers must be a positive integer, got {self.workers!r}")

    def resolved(self, n: int) -> "SolverConfig":
        """Copy with ``ants`` filled in for an ``n``-city instance."""
        return self if self.ants is not None else replace(self, ants=n)

    def as_baseline(self) -> "SolverConfig":
        return replace(self, baseline=True)

    def to_json(self) -> dict:
        d = asdict(self)
        # execution detail; results do not depend on it
        d.pop("workers")
        return d


@dataclass
class PheromoneField:
    tau_pos: np.ndarray
    tau_neg: np.ndarray
    tau0: float


@dataclass
class SolverState:
    inst: TspInstance
    config: SolverConfig
    pheromone: PheromoneField
    heuristic: np.ndarray  # eta ** beta, zero diagonal
    best: Tour | None = None
    iteration: int = 0

    @property
    def n(self) -> int:
        return self.inst.n


def init_solver(inst: TspInstance, config: SolverConfig) -> SolverState:
    n = inst.n
    if n < 3:
        raise ValueError(f"a Hamiltonian cycle needs at least 3 cities, got {n}")
    config = config.resolved(n)
    l_nn = nearest_neighbour(inst, 0).length
    tau0 = 1.0 / (n * max(l_nn, ZERO_COST_EPS))
    eta = 1.0 / np.maximum(inst.cost, ZERO_COST_EPS)
    heuristic = eta ** config.beta
    np.fill_diagonal(heuristic, 0.0)
    field_ = PheromoneField(np.full((n, n), tau0), np.zeros((n, n)), tau0)
    return SolverState(inst, config, field_, heuristic)


def ant_rng(seed: int, iteration: int, ant: int) -> np.random.Generator:
    """Independent stream for one ant in one iteration."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((seed & UINT64_MASK, iteration, ant))))


def _weight_matrix(state: SolverState) -> np.ndarray:
    cfg = state.config
    w = state.pheromone.tau_pos ** cfg.alpha * state.heuristic
    if not cfg.baseline:
        w = w * (1.0 + state.pheromone.tau_neg) ** (-cfg.gamma)
    return w


def transition_weights(state: SolverState, current: int, visited) -> np.ndarray:
    """Unnormalized move weights out of ``current``.

    Returns a length-n array; entries for visited cities (and ``current``)
    are zero.
    """
    n = state.n
    mask = np.zeros(n, dtype=bool)
    mask[list(visited)] = True
    mask[current] = True
    if mask.all():
        raise ValueError("no unvisited city left")
    cfg = state.config
    w = state.pheromone.tau_pos[current] ** cfg.alpha * state.heuristic[current]
    if not cfg.baseline:
        w = w * (1.0 + state.pheromone.tau_neg[current]) ** (-cfg.gamma)
    return np.where(mask, 0.0, w)


def transition_probabilities(state: SolverState, current: int, visited) -> np.ndarray:
    w = transition_weights(state, current, visited)
    return w / w.sum()


@njit(cache=True, nogil=True)
def _build(weights, cost, q0, u, order):
    n = weights.shape[0]
    visited = np.zeros(n, dtype=np.bool_)
    cur = int(u[0] * n)
    if cur >= n:
        cur = n - 1
    order[0] = cur
    visited[cur] = True
    for step in range(1, n):
        row = weights[cur]
        nxt = -1
        if u[2 * step - 1] < q0:
            best = -1.0
            for j in range(n):
                if not visited[j] and row[j] > best:
                    best = row[j]
                    nxt = j
        else:
            total = 0.0
            for j in range(n):
                if not visited[j]:
                    total += row[j]
            if total > 0.0:
                threshold = u[2 * step] * total
                acc = 0.0
                for j in range(n):
                    if not visited[j] and row[j] > 0.0:
                        acc += row[j]
                        nxt = j
                        if acc > threshold:
                            break
            else:
                for j in range(n):
                    if not visited[j]:
                        nxt = j
                        break
        order[step] = nxt
        visited[nxt] = True
        cur = nxt
    length = 0.0
    for k in range(n - 1):
        length += cost[order[k], order[k + 1]]
    length += cost[order[n - 1], order[0]]
    return length


def _walk(weights: np.ndarray, cost: np.ndarray, q0: float, u: np.ndarray) -> Tour:
    order = np.empty(weights.shape[0], dtype=np.int64)
    length = _build(weights, cost, q0, u, order)
    return Tour(tuple(int(c) for c in order), float(length))


def apply_local_update(state: SolverState, tour: Tour) -> None:
    """ACS local rule: pull every traversed edge toward ``tau0``."""
    rho = state.config.rho_pos
    ph = state.pheromone
    a = np.asarray(tour.order)
    b = np.roll(a, -1)
    ph.tau_pos[a, b] = (1.0 - rho) * ph.tau_pos[a, b] + rho * ph.tau0
    ph.tau_pos[b, a] = ph.tau_pos[a, b]


def construct_tour(state: SolverState, rng: np.random.Generator, local_update: bool = True) -> Tour:
    """Build one ant's tour from the current pheromone, then apply the local update."""
    u = rng.random(2 * state.n - 1)
    tour = _walk(_weight_matrix(state), state.inst.cost, state.config.q0, u)
    if local_update:
        apply_local_update(state, tour)
    return tour


def _edge_mask(tour: Tour, n: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    a = np.asarray(tour.order)
    b = np.roll(a, -1)
    m[a, b] = True
    m[b, a] = True
    return m


def update_pheromones(state: SolverState, iteration_tours: Sequence[Tour]) -> None:
    """Global update after an iteration.

    The positive trail evaporates (on the best-so-far tour's edges, or on
    every edge with ``evaporation="global"``) and the best-so-far tour
    reinforces its edges. The negative trail evaporates everywhere, and (unless running the baseline) every edge of the iteration's
    worst tour that the iteration's best tour does not use gets negative
    pheromone.
    """
    if not iteration_tours:
        raise ValueError("update needs at least one tour")
    cfg = state.config
    ph = state.pheromone
    n = state.n
    lengths = [t.length for t in iteration_tours]
    it_best = iteration_tours[int(np.argmin(lengths))]
    it_worst = iteration_tours[int(np.argmax(lengths))]
    if state.best is None or it_best.length < state.best.length:
        state.best = it_best

    best_mask = _edge_mask(state.best, n)
    if cfg.evaporation == "global":
        ph.tau_pos *= 1.0 - cfg.rho_pos
    else:
        ph.tau_pos[best_mask] *= 1.0 - cfg.rho_pos
    ph.tau_pos[best_mask] += cfg.rho_pos / max(state.best.length, ZERO_COST_EPS)
    np.maximum(ph.tau_pos, TAU_FLOOR, out=ph.tau_pos)

    if cfg.baseline:
        return
    ph.tau_neg *= 1.0 - cfg.rho_neg
    if cfg.neg_deposit > 0:
        marked = _edge_mask(it_worst, n) & ~_edge_mask(it_best, n)
        ph.tau_neg[marked] += cfg.neg_deposit
        np.minimum(ph.tau_neg, cfg.tau_neg_max, out=ph.tau_neg)


@dataclass
class SolveResult:
    instance: str
    best: Tour
    trace: list[float]
    iterations_run: int
    config: SolverConfig
    seed: int

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "config": self.config.to_json(),
            "seed": self.seed,
            "best_order": list(self.best.order),
            "best_length": self.best.length,
            "iterations_run": self.iterations_run,
            "trace": self.trace,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def trace_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "best_so_far"])
        for k, v in enumerate(self.trace, start=1):
            w.writerow([k, repr(v)])
        return buf.getvalue()


def _construct_iteration(state: SolverState, iteration: int, pool) -> list[Tour]:
    cfg = state.config
    weights = _weight_matrix(state)
    cost = state.inst.cost
    draws = [ant_rng(cfg.seed, iteration, k).random(2 * state.n - 1) for k in range(cfg.ants)]
    if pool is None:
        return [_walk(weights, cost, cfg.q0, u) for u in draws]
    return list(pool.map(lambda u: _walk(weights, cost, cfg.q0, u), draws))


def run(inst: TspInstance, config: SolverConfig) -> SolveResult:
    """Run the colony for ``config.iterations`` iterations or until ``config.target``.

    All ants of an iteration read the same pheromone snapshot; their local
    updates are applied afterwards in ant order, so ``workers > 1`` gives
    the same result as a serial run.
    """
    state = init_solver(inst, config)
    cfg = state.config
    trace: list[float] = []
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for it in range(cfg.iterations):
            state.iteration = it
            tours = _construct_iteration(state, it, pool)
            for t in tours:
                apply_local_update(state, t)
            update_pheromones(state, tours)
            trace.append(state.best.length)
            if cfg.target is not None and state.best.length <= cfg.target:
                break
    finally:
        if pool is not None:
            pool.shutdown()
    return SolveResult(inst.name, state.best, trace, len(trace), cfg, cfg.seed)


# --------------------------------------------------------------------------- documents


@dataclass
class CycleResult:
    ids: list[str]
    order: list[int]
    hops: list[float]
    total_length: float
    coherence: float
    result: SolveResult = field(repr=False)

    def to_json(self) -> dict:
        return {
            "ids": self.ids,
            "hop_distances": self.hops,
            "total_length": self.total_length,
            "coherence_score": self.coherence,
            "seed": self.result.seed,
            "config": self.result.config.to_json(),
        }


def _canonical(order: Sequence[int], ids: Sequence[str]) -> list[int]:
    """Rotate to start at the smallest id; walk toward the smaller-id neighbour."""
    order = list(order)
    k = min(range(len(order)), key=lambda i: ids[order[i]])
    order = order[k:] + order[:k]
    if ids[order[-1]] < ids[order[1]]:
        order = [order[0]] + order[:0:-1]
    return order


def coherence_score(matrix: DistanceMatrix | np.ndarray, order: Sequence[int]) -> float:
    """Mean hop distance around the cycle; lower reads more smoothly."""
    entries = matrix.entries if isinstance(matrix, DistanceMatrix) else np.asarray(matrix)
    return tour_length(entries, order) / len(order)


def cycle_corpus(matrix: DistanceMatrix, config: SolverConfig | None = None) -> CycleResult:
    """Order documents into a closed reading cycle of low total dissimilarity."""
    if matrix.n < 3:
        raise ValueError(f"a document cycle needs at least 3 documents, got {matrix.n}")
    inst = TspInstance("corpus", matrix.entries, "qanalysis")
    result = run(inst, config or SolverConfig())
    order = _canonical(result.best.order, matrix.ids)
    e = matrix.entries
    hops = [float(e[order[k], order[(k + 1) % len(order)]]) for k in range(len(order))]
    total = tour_length(e, order)
    return CycleResult([matrix.ids[i] for i in order], order, hops, total,
                       total / len(order), result)

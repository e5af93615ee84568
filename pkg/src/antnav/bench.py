"""Paired multi-seed comparison of the negative-trail solver against plain ACS."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

from scipy.stats import binomtest

from .aco import SolveResult, SolverConfig, run
from .tsp import TspInstance

__all__ = [
    "SHARED_PARAMS",
    "MIN_SEEDS",
    "RunSummary",
    "BenchReport",
    "ComparisonSummary",
    "iterations_to_target",
    "run_benchmark",
    "compare",
    "sign_test",
]

SHARED_PARAMS = ("ants", "alpha", "beta", "rho_pos", "q0", "iterations", "evaporation")
MIN_SEEDS = 10


def iterations_to_target(trace: Sequence[float], target: float) -> int | None:
    """1-based index of the first trace entry at or below ``target``, else None."""
    if len(trace) == 0:
        raise ValueError("trace is empty")
    if not target > 0:
        raise ValueError(f"target must be > 0, got {target}")
    for k, v in enumerate(trace, start=1):
        if v <= target:
            return k
    return None


@dataclass(frozen=True)
class RunSummary:
    seed: int
    final_length: float
    iterations_to_target: int | None


@dataclass
class BenchReport:
    instance: str
    arm: str
    config: SolverConfig
    target: float
    runs: list[RunSummary]
    results: list[SolveResult] = field(default_factory=list, repr=False, compare=False)
    # wall-clock seconds for the whole arm; kept out of JSON so outputs stay reproducible
    elapsed: float = field(default=0.0, repr=False, compare=False)

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.runs]

    def hits(self) -> int:
        return sum(r.iterations_to_target is not None for r in self.runs)

    def to_json(self) -> dict:
        return {
            "instance": self.instance,
            "arm": self.arm,
            "target": self.target,
            "config": self.config.to_json(),
            "runs": [{"seed": r.seed, "final_length": r.final_length,
                      "iterations_to_target": r.iterations_to_target} for r in self.runs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BenchReport":
        cfg = SolverConfig(**obj["config"])
        runs = [RunSummary(r["seed"], r["final_length"], r["iterations_to_target"])
                for r in obj["runs"]]
        return cls(obj["instance"], obj["arm"], cfg, obj["target"], runs)


def _check_shared(a: SolverConfig, b: SolverConfig, n: int) -> None:
    a, b = a.resolved(n), b.resolved(n)
    diff = [p for p in SHARED_PARAMS if getattr(a, p) != getattr(b, p)]
    if diff:
        raise ValueError(f"variant and baseline configs differ on shared parameters {diff}; "
                         "the comparison would be confounded")


def _arm(inst, config, seeds, target, arm) -> BenchReport:
    runs, results = [], []
    t0 = time.perf_counter()
    for s in seeds:
        res = run(inst, replace(config, seed=s))
        results.append(res)
        runs.append(RunSummary(s, res.best.length, iterations_to_target(res.trace, target)))
    return BenchReport(inst.name, arm, config.resolved(inst.n), target, runs, results,
                       time.perf_counter() - t0)


def run_benchmark(
    inst: TspInstance,
    variant_config: SolverConfig,
    baseline_config: SolverConfig,
    seeds: Sequence[int],
    target: float,
) -> tuple[BenchReport, BenchReport]:
    """Run both arms on every seed; rows follow the given seed order."""
    seeds = list(seeds)
    if len(seeds) < MIN_SEEDS:
        raise ValueError(f"need at least {MIN_SEEDS} seeds, got {len(seeds)}")
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if not target > 0:
        raise ValueError(f"target must be > 0, got {target}")
    _check_shared(variant_config, baseline_config, inst.n)
    return (_arm(inst, variant_config, seeds, target, "variant"),
            _arm(inst, baseline_config, seeds, target, "baseline"))


def sign_test(differences: Sequence[float]) -> float:
    """Two-sided exact sign test p-value; zero differences are discarded."""
    nonzero = [d for d in differences if d != 0]
    if not nonzero:
        return 1.0
    k = sum(d < 0 for d in nonzero)
    return float(binomtest(k, len(nonzero), 0.5).pvalue)


def _median(xs):
    return statistics.median(xs) if xs else None


@dataclass
class ComparisonSummary:
    instance: str
    target: float
    seeds: list[int]
    median_final: dict[str, float]
    median_iterations: dict[str, float | None]
    misses: dict[str, int]
    final_differences: list[float]
    paired_seeds: list[int]
    excluded_seeds: list[int]
    iteration_differences: list[int]
    median_iteration_difference: float | None
    wins: dict[str, int]
    sign_test_p: float

    @property
    def favours(self) -> str | None:
        """Arm with more paired wins, or None on a tie."""
        (a, wa), (b, wb) = self.wins.items()
        if wa == wb:
            return None
        return a if wa > wb else b

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["favours"] = self.favours
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def compare(variant: BenchReport, baseline: BenchReport) -> ComparisonSummary:
    """Paired summary of two arms run on the same seeds.

    Differences are ``variant - baseline`` per seed, so negative values
    favour the first report. Per-arm figures are keyed by ``BenchReport.arm``.
    Seeds where either arm never reached the target are left out of the
    iteration pairing and listed in ``excluded_seeds``.
    """
    if variant.seeds != baseline.seeds:
        raise ValueError("reports cover different seed lists")
    if variant.instance != baseline.instance or variant.target != baseline.target:
        raise ValueError("reports differ in instance or target")
    va, ba = variant.arm, baseline.arm
    if va == ba:
        raise ValueError(f"both reports are labelled {va!r}")
    paired, excluded, it_diff = [], [], []
    for a, b in zip(variant.runs, baseline.runs):
        if a.iterations_to_target is None or b.iterations_to_target is None:
            excluded.append(a.seed)
            continue
        paired.append(a.seed)
        it_diff.append(a.iterations_to_target - b.iterations_to_target)

    def med_iters(rep):
        return _median([r.iterations_to_target for r in rep.runs
                        if r.iterations_to_target is not None])

    return ComparisonSummary(
        instance=variant.instance,
        target=variant.target,
        seeds=variant.seeds,
        median_final={va: _median([r.final_length for r in variant.runs]),
                      ba: _median([r.final_length for r in baseline.runs])},
        median_iterations={va: med_iters(variant), ba: med_iters(baseline)},
        misses={va: len(variant.runs) - variant.hits(), ba: len(baseline.runs) - baseline.hits()},
        final_differences=[a.final_length - b.final_length
                           for a, b in zip(variant.runs, baseline.runs)],
        paired_seeds=paired,
        excluded_seeds=excluded,
        iteration_differences=it_diff,
        median_iteration_difference=_median(it_diff),
        wins={va: sum(d < 0 for d in it_diff), ba: sum(d > 0 for d in it_diff)},
        sign_test_p=sign_test(it_diff),
    )

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from antnav.aco import SolverConfig
from antnav.bench import (
    BenchReport,
    RunSummary,
    compare,
    iterations_to_target,
    run_benchmark,
    sign_test,
)
from antnav.tsp import brute_force_optimum, random_euclidean

from . import oracles

CFG = SolverConfig()


def report(arm, its, seeds=None, finals=None):
    seeds = seeds or list(range(1, len(its) + 1))
    finals = finals or [100.0] * len(its)
    runs = [RunSummary(s, f, i) for s, f, i in zip(seeds, finals, its)]
    return BenchReport("toy", arm, CFG, 100.0, runs)


def test_iterations_to_target_examples():
    assert iterations_to_target([100, 90, 80, 75], 80) == 3
    assert iterations_to_target([100, 90, 80, 75], 70) is None
    assert iterations_to_target([100, 90], 100) == 1
    assert iterations_to_target([100, 90], 150) == 1


@pytest.mark.parametrize("trace,target", [([], 10), ([5], 0), ([5], -1)])
def test_iterations_to_target_errors(trace, target):
    with pytest.raises(ValueError):
        iterations_to_target(trace, target)


def test_compare_identical_reports():
    s = compare(report("variant", [5, 7, 9]), report("baseline", [5, 7, 9]))
    assert s.median_iteration_difference == 0
    assert s.sign_test_p == 1.0
    assert s.favours is None


def test_compare_constructed_reports():
    s = compare(report("variant", [50, 60, 70]), report("baseline", [80, 90, 100]))
    assert s.median_iterations == {"variant": 60, "baseline": 90}
    assert s.iteration_differences == [-30, -30, -30]
    assert s.wins == {"variant": 3, "baseline": 0}
    assert s.favours == "variant"
    assert s.sign_test_p == oracles.sign_test_p([-30, -30, -30]) == 0.25


def test_compare_excludes_missing_seed():
    s = compare(report("variant", [50, 60, 70]), report("baseline", [80, None, 100]))
    assert s.excluded_seeds == [2]
    assert s.paired_seeds == [1, 3]
    assert s.misses == {"variant": 0, "baseline": 1}
    assert s.median_iterations["baseline"] == 90


def test_compare_antisymmetric():
    a = report("variant", [50, 60, 70, 40], finals=[1.0, 2.0, 3.0, 4.0])
    b = report("baseline", [80, 20, 70, None], finals=[2.0, 2.0, 1.0, 9.0])
    ab, ba = compare(a, b), compare(b, a)
    assert ab.iteration_differences == [-d for d in ba.iteration_differences]
    assert ab.final_differences == [-d for d in ba.final_differences]
    assert ab.sign_test_p == ba.sign_test_p
    assert ab.wins == ba.wins


def test_compare_rejects_mismatched_seeds():
    with pytest.raises(ValueError, match="seed"):
        compare(report("variant", [1, 2], seeds=[1, 2]), report("baseline", [1, 2], seeds=[1, 3]))


@given(st.lists(st.integers(-5, 5), max_size=40))
def test_sign_test_matches_exact_binomial(diffs):
    assert sign_test(diffs) == pytest.approx(oracles.sign_test_p(diffs), rel=1e-9, abs=1e-15)


def test_summary_json_round_trips():
    s = compare(report("variant", [50, 60, 70]), report("baseline", [80, 90, 100]))
    d = json.loads(s.dumps())
    assert d["favours"] == "variant" and d["sign_test_p"] == 0.25


# ---------------------------------------------------------------- harness

SMALL = SolverConfig(iterations=30)


def test_rows_follow_seed_order():
    inst = random_euclidean(6, 0)
    seeds = [9, 3, 7, 1, 10, 2, 8, 4, 6, 5]
    v, b = run_benchmark(inst, SMALL, SMALL.as_baseline(), seeds, 1e9)
    assert v.seeds == seeds and b.seeds == seeds
    assert all(r.iterations_to_target == 1 for r in v.runs)


def test_requires_ten_distinct_seeds():
    inst = random_euclidean(6, 0)
    with pytest.raises(ValueError, match="at least 10"):
        run_benchmark(inst, SMALL, SMALL.as_baseline(), [1, 2, 3], 10.0)
    with pytest.raises(ValueError, match="distinct"):
        run_benchmark(inst, SMALL, SMALL.as_baseline(), [1] * 10, 10.0)


@pytest.mark.parametrize("kw", [{"q0": 0.5}, {"iterations": 31}, {"ants": 3}, {"rho_pos": 0.2},
                                {"evaporation": "global"}])
def test_shared_parameter_mismatch(kw):
    from dataclasses import replace

    with pytest.raises(ValueError, match="shared"):
        run_benchmark(random_euclidean(6, 0), SMALL, replace(SMALL, baseline=True, **kw),
                      range(10), 10.0)


def test_negative_parameters_may_differ():
    inst = random_euclidean(6, 0)
    from dataclasses import replace

    run_benchmark(inst, replace(SMALL, gamma=2.0, rho_neg=0.3), SMALL.as_baseline(), range(10), 1e9)


def test_reproducible_and_degenerate():
    inst = random_euclidean(9, 1)
    degenerate = SolverConfig(iterations=30, gamma=0, neg_deposit=0)
    v1, b1 = run_benchmark(inst, degenerate, SMALL.as_baseline(), range(10), 1.0)
    v2, _ = run_benchmark(inst, degenerate, SMALL.as_baseline(), range(10), 1.0)
    assert v1.runs == v2.runs
    assert [r.trace for r in v1.results] == [r.trace for r in b1.results]
    assert [(r.final_length, r.iterations_to_target) for r in v1.runs] == \
           [(r.final_length, r.iterations_to_target) for r in b1.runs]


def test_small_instance_hits_optimum_in_both_arms():
    inst = random_euclidean(7, 5)
    opt = brute_force_optimum(inst).length
    cfg = SolverConfig(iterations=500)
    v, b = run_benchmark(inst, cfg, cfg.as_baseline(), range(20), opt + 1e-9)
    assert v.hits() >= 19 and b.hits() >= 19


def test_report_json_round_trip():
    v, _ = run_benchmark(random_euclidean(6, 2), SMALL, SMALL.as_baseline(), range(10), 1e9)
    again = BenchReport.from_json(json.loads(json.dumps(v.to_json())))
    assert again == v

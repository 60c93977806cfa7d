"""Acceptance suite: one test per release criterion, at pinned tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion. Budgets, seeds, and thresholds are frozen here on purpose; they
are the contract, not tunables.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
import pytest

from recourse_costs.cli import main
from recourse_costs.core import (
    FeatureCatalog,
    Recourse,
    StrengthVector,
    compare_recourses,
    costs_from_strengths,
    pairwise_prob,
    recourse_prob,
    recourse_prob_mc,
)
from recourse_costs.inference import EstimatorConfig, map_estimate
from recourse_costs.simulation import (
    PairwiseSimConfig,
    RecourseSimConfig,
    run_pairwise_experiment,
    run_recourse_experiment,
)

SEED = 20260809
PER_FEATURE_SCHEDULE = (50, 100, 200, 500)
TRIALS = 10
FIGURE2_SIZES = (5, 10, 15, 20)
FIGURE4_RECOURSE_SIZES = (1, 2, 3, 4, 5, 6)


def report_pass(name: str) -> None:
    print(f"\n[acceptance] {name}: PASS")


@dataclass
class TimedReports:
    reports: dict
    elapsed_s: float


@pytest.fixture(scope="module")
def figure2_reports() -> TimedReports:
    start = time.perf_counter()
    reports = {}
    for n in FIGURE2_SIZES:
        config = PairwiseSimConfig(
            num_features=n,
            comparisons_schedule=tuple(c * n for c in PER_FEATURE_SCHEDULE),
            trials=TRIALS,
            seed=SEED,
        )
        reports[n] = run_pairwise_experiment(config)
    return TimedReports(reports, time.perf_counter() - start)


@pytest.fixture(scope="module")
def figure4_reports() -> TimedReports:
    start = time.perf_counter()
    reports = {}
    for size in FIGURE4_RECOURSE_SIZES:
        config = RecourseSimConfig(
            recourse_size=size,
            comparisons_schedule=tuple(c * 20 for c in PER_FEATURE_SCHEDULE),
            trials=TRIALS,
            seed=SEED,
            num_features=20,
        )
        reports[size] = run_recourse_experiment(config)
    return TimedReports(reports, time.perf_counter() - start)


def test_counterexample_reproduction():
    """Same cost ordering, different magnitudes, opposite verdicts."""
    start = time.perf_counter()
    catalog = FeatureCatalog(["amt", "add", "inc", "age"])
    recourse_1 = Recourse({"amt", "age"})
    recourse_2 = Recourse({"add", "inc"})
    wide = costs_from_strengths(
        StrengthVector(catalog, [math.log(10), math.log(3), math.log(2), 0.0])
    )
    narrow = costs_from_strengths(
        StrengthVector(catalog, [math.log(10), math.log(9), math.log(8), 0.0])
    )

    under_wide = compare_recourses(recourse_1, recourse_2, wide)
    assert under_wide.rho_12 == pytest.approx(0.55, abs=0.005)
    assert under_wide.rho_21 == pytest.approx(0.45, abs=0.005)
    assert under_wide.rho_12 == pytest.approx(0.5465, abs=5e-5)
    assert under_wide.easier == "r1"

    under_narrow = compare_recourses(recourse_1, recourse_2, narrow)
    assert under_narrow.rho_12 == pytest.approx(0.32, abs=0.005)
    assert under_narrow.rho_21 == pytest.approx(0.68, abs=0.005)
    assert under_narrow.rho_12 == pytest.approx(0.3232, abs=5e-5)
    assert under_narrow.easier == "r2"

    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    report_pass(f"counterexample-reproduction ({elapsed * 1000:.0f} ms)")


def test_probability_invariant_suite():
    """Normalization, shift invariance, transitivity, reductions: 0 violations."""
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    tol = 1e-12

    pairs = rng.uniform(-30, 30, size=(10_000, 2))
    shifts = rng.uniform(-50, 50, size=10_000)
    for (bf, bg), c in zip(pairs, shifts):
        assert abs(pairwise_prob(bf, bg) + pairwise_prob(bg, bf) - 1.0) <= tol
        assert abs(pairwise_prob(bf + c, bg + c) - pairwise_prob(bf, bg)) <= tol

    triples = rng.uniform(-30, 30, size=(10_000, 3))
    for a, b, c in triples:
        if pairwise_prob(a, b) > 0.5 and pairwise_prob(b, c) > 0.5:
            assert pairwise_prob(a, c) > 0.5

    catalog = FeatureCatalog([f"x{i}" for i in range(7)])
    singleton_1, singleton_2 = Recourse({"x0"}), Recourse({"x1"})
    set_1, set_2 = Recourse({"x0", "x1", "x2"}), Recourse({"x3", "x4"})
    shared_1 = Recourse(set_1.features | {"x6"})
    shared_2 = Recourse(set_2.features | {"x6"})
    for _ in range(1_000):
        beta = StrengthVector(catalog, rng.uniform(-30, 30, size=7))
        assert abs(
            recourse_prob(singleton_1, singleton_2, beta)
            - pairwise_prob(beta.value_of("x0"), beta.value_of("x1"))
        ) <= tol
        assert abs(
            recourse_prob(set_1, set_2, beta) + recourse_prob(set_2, set_1, beta) - 1.0
        ) <= tol
        assert abs(
            recourse_prob(shared_1, shared_2, beta) - recourse_prob(set_1, set_2, beta)
        ) <= tol

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    report_pass(f"probability-invariant-suite ({elapsed:.1f} s)")


def test_closed_form_estimator_oracle():
    """Two-feature fits must hit the log win ratio exactly."""
    from recourse_costs.core import ComparisonDataset, PairwiseComparison

    catalog = FeatureCatalog(["f", "g"])
    for ratio in (2, 3, 10):
        dataset = ComparisonDataset(
            catalog,
            [PairwiseComparison("f", "g", float(ratio)), PairwiseComparison("g", "f", 1.0)],
        )
        result = map_estimate(dataset, EstimatorConfig(pseudo_count=0.0))
        difference = result.strengths.value_of("f") - result.strengths.value_of("g")
        assert difference == pytest.approx(math.log(ratio), abs=1e-6)
    report_pass("closed-form-estimator-oracle")


def test_pairwise_recovery_curves(figure2_reports):
    """Recovery improves with survey size for every catalog size."""
    for n, report in figure2_reports.reports.items():
        mses = list(report.mse_by_budget().values())
        assert mses[-1] < mses[0], f"|F|={n}: MSE did not decrease ({mses[0]} -> {mses[-1]})"
        assert mses[-1] < 0.02, f"|F|={n}: final MSE {mses[-1]} above threshold"
    assert figure2_reports.elapsed_s < 120.0
    report_pass(f"pairwise-recovery-curves ({figure2_reports.elapsed_s:.1f} s)")


def test_recourse_recovery_curves(figure2_reports, figure4_reports):
    """Whole-recourse surveys still recover per-feature strengths."""
    pairwise_20 = figure2_reports.reports[20]
    size_one = figure4_reports.reports[1]
    assert [r.mse for r in size_one.rows] == [r.mse for r in pairwise_20.rows]
    assert [r.converged for r in size_one.rows] == [r.converged for r in pairwise_20.rows]

    for size in FIGURE4_RECOURSE_SIZES[1:]:
        mses = list(figure4_reports.reports[size].mse_by_budget().values())
        assert mses[-1] < mses[0], f"size={size}: MSE did not decrease ({mses[0]} -> {mses[-1]})"
    assert figure4_reports.elapsed_s < 300.0
    report_pass(f"recourse-recovery-curves ({figure4_reports.elapsed_s:.1f} s)")


def test_monte_carlo_convergence():
    """1e5-sample estimates sit within 0.01 of the exact value, 100 instances."""
    rng = np.random.default_rng(SEED + 1)
    for instance in range(100):
        n = int(rng.integers(4, 13))
        catalog = FeatureCatalog([f"x{i}" for i in range(n)])
        beta = StrengthVector(catalog, rng.uniform(-3, 3, size=n))
        only_first = int(rng.integers(1, max(2, n // 2)))
        only_second = int(rng.integers(1, max(2, n - only_first - 1)))
        shared = int(rng.integers(0, n - only_first - only_second + 1))
        order = rng.permutation(n)
        names = catalog.features
        # order[:only_first] is exclusive to the first recourse, the next
        # `shared` indices belong to both, the following to the second only
        first = Recourse(names[i] for i in order[: only_first + shared])
        second = Recourse(names[i] for i in order[only_first : only_first + shared + only_second])
        exact = recourse_prob(first, second, beta)
        estimate = recourse_prob_mc(first, second, beta, samples=100_000, seed=SEED + instance)
        assert abs(estimate - exact) < 0.01, f"instance {instance}"
    report_pass("monte-carlo-convergence")


def _strip_runtime_column(text: str) -> str:
    lines = text.splitlines()
    runtime_index = lines[0].split(",").index("runtime_ms")
    kept = []
    for line in lines:
        cells = line.split(",")
        del cells[runtime_index]
        kept.append(",".join(cells))
    return "\n".join(kept)


def test_seeded_commands_are_deterministic(tmp_path):
    """Every seeded command produces byte-identical data outputs on reruns."""

    def run_twice(argv_builder, compare):
        outputs = []
        for run in ("one", "two"):
            base = tmp_path / run
            base.mkdir(exist_ok=True)
            argv, files = argv_builder(base)
            assert main(argv) == 0
            outputs.append([compare(path) for path in files])
        assert outputs[0] == outputs[1]

    identity = lambda path: path.read_bytes()

    def sim_pairwise(base):
        beta, out = base / "beta.csv", base / "survey.csv"
        return (
            ["simulate-pairwise", "--num-features", "6", "--comparisons", "300",
             "--seed", str(SEED), "--beta-out", str(beta), "--out", str(out)],
            [beta, out],
        )

    def sim_recourse(base):
        beta, out = base / "beta.csv", base / "survey.csv"
        return (
            ["simulate-recourse", "--num-features", "12", "--recourse-size", "3",
             "--comparisons", "200", "--seed", str(SEED),
             "--beta-out", str(beta), "--out", str(out)],
            [beta, out],
        )

    run_twice(sim_pairwise, identity)
    run_twice(sim_recourse, identity)

    # estimate consumes the survey written above; identical input -> identical output
    def estimate(base):
        fitted, costs = base / "fit.csv", base / "costs.csv"
        return (
            ["estimate", "--input", str(tmp_path / "one" / "survey.csv"),
             "--input-kind", "recourse", "--out", str(fitted), "--costs-out", str(costs)],
            [fitted, costs],
        )

    run_twice(estimate, identity)

    def experiment(base):
        out = base / "report.csv"
        return (
            ["experiment", "--kind", "recourse", "--num-features", "10",
             "--recourse-size", "1,2", "--schedule", "100,200", "--trials", "3",
             "--seed", str(SEED), "--out", str(out)],
            [out],
        )

    run_twice(experiment, lambda p: _strip_runtime_column(p.read_text()))
    report_pass("seeded-command-determinism")


def test_runtime_trend(figure2_reports, figure4_reports):
    """Median fit time does not shrink as the survey budget grows."""
    for n, report in figure2_reports.reports.items():
        medians = list(report.median_runtime_by_budget().values())
        assert medians[-1] >= medians[0], f"|F|={n}: fit time fell across the schedule"
    for size, report in figure4_reports.reports.items():
        medians = list(report.median_runtime_by_budget().values())
        assert medians[-1] >= medians[0], f"size={size}: fit time fell across the schedule"
    report_pass("runtime-trend")

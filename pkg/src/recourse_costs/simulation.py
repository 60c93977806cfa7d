"""Seeded synthetic-survey generators and the parameter-recovery harness.

Everything here is deterministic given its seed: per-trial and per-point
random streams are derived from ``(seed, trial, point)`` via
``numpy.random.SeedSequence``, so dropping or reordering trials never
shifts the data of the others.

Pairwise surveys and recourse surveys of size one share a single sampling
routine, so a size-one recourse run is bit-for-bit identical to a pairwise
run under the same seed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .core import (
    ComparisonDataset,
    FeatureCatalog,
    PairwiseComparison,
    Recourse,
    RecourseComparison,
    StrengthVector,
    _logistic_array,
)
from .inference import EstimatorConfig, expand_recourse_comparisons, map_estimate

__all__ = [
    "LabelMode",
    "PairwiseSimConfig",
    "RecourseSimConfig",
    "ExperimentRow",
    "ExperimentReport",
    "default_catalog",
    "derive_seed",
    "draw_true_strengths",
    "simulate_pairwise_survey",
    "simulate_recourse_survey",
    "centered_mse",
    "run_pairwise_experiment",
    "run_recourse_experiment",
]

LabelMode = Literal["bernoulli", "deterministic"]


def default_catalog(num_features: int) -> FeatureCatalog:
    """Synthetic catalog f0..f{n-1} used by the simulation harness."""
    if num_features < 2:
        raise ValueError(f"num_features must be >= 2, got {num_features}")
    return FeatureCatalog(f"f{i}" for i in range(num_features))


def derive_seed(seed: int, *path: int) -> int:
    """Deterministic 64-bit child seed for a substream labelled by ``path``."""
    state = np.random.SeedSequence([seed, *path]).generate_state(1, np.uint64)
    return int(state[0])


def draw_true_strengths(num_features: int, seed: int) -> StrengthVector:
    """Ground-truth strengths, i.i.d. uniform on [0, 1), on a default catalog."""
    catalog = default_catalog(num_features)
    rng = np.random.default_rng(seed)
    return StrengthVector(catalog, rng.random(num_features))


def _sample_disjoint_sets(
    rng: np.random.Generator, num_features: int, size: int, count: int
) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` uniform pairs of disjoint feature-index sets of ``size``.

    One random permutation per row (via argsort of uniforms), split into the
    first and second ``size`` positions. Shared by the pairwise sampler
    (size 1) and the recourse sampler, so their random streams coincide.
    """
    order = np.argsort(rng.random((count, num_features)), axis=1)
    return order[:, :size], order[:, size : 2 * size]


def _win_probabilities(beta: np.ndarray, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Per-row probability that the first index set beats the second.

    Mean of the pairwise win probabilities over the size x size cross pairs;
    the sets are disjoint by construction so no shared-feature exclusion is
    needed here.
    """
    diffs = beta[first][:, :, None] - beta[second][:, None, :]
    return _logistic_array(diffs).mean(axis=(1, 2))


def simulate_pairwise_survey(
    beta: StrengthVector, num_comparisons: int, seed: int
) -> ComparisonDataset:
    """Generate a pairwise survey from known strengths.

    Each comparison draws a pair of distinct features uniformly at random and
    records the first as winner with its pairwise win probability, all with
    weight 1.
    """
    if num_comparisons < 1:
        raise ValueError(f"num_comparisons must be >= 1, got {num_comparisons}")
    catalog = beta.catalog
    rng = np.random.default_rng(seed)
    first, second = _sample_disjoint_sets(rng, catalog.size, 1, num_comparisons)
    prob_first = _win_probabilities(beta.values, first, second)
    first_wins = rng.random(num_comparisons) < prob_first
    names = catalog.features
    records = [
        PairwiseComparison(names[f], names[g])
        if won
        else PairwiseComparison(names[g], names[f])
        for f, g, won in zip(first[:, 0], second[:, 0], first_wins)
    ]
    return ComparisonDataset(catalog, records)


def simulate_recourse_survey(
    beta: StrengthVector,
    recourse_size: int,
    num_comparisons: int,
    seed: int,
    label_mode: LabelMode = "bernoulli",
) -> list[RecourseComparison]:
    """Generate a recourse-vs-recourse survey from known strengths.

    Each comparison samples two disjoint recourses of ``recourse_size``
    features uniformly at random and labels the winner by its set-level win
    probability: a Bernoulli draw in ``bernoulli`` mode, or a >= 1/2
    threshold in ``deterministic`` mode (exact ties go to the first set).
    """
    if recourse_size < 1:
        raise ValueError(f"recourse_size must be >= 1, got {recourse_size}")
    if num_comparisons < 1:
        raise ValueError(f"num_comparisons must be >= 1, got {num_comparisons}")
    catalog = beta.catalog
    if 2 * recourse_size > catalog.size:
        raise ValueError(
            f"cannot sample two disjoint recourses of size {recourse_size} "
            f"from {catalog.size} features"
        )
    rng = np.random.default_rng(seed)
    first, second = _sample_disjoint_sets(rng, catalog.size, recourse_size, num_comparisons)
    prob_first = _win_probabilities(beta.values, first, second)
    if label_mode == "bernoulli":
        first_wins = rng.random(num_comparisons) < prob_first
    elif label_mode == "deterministic":
        first_wins = prob_first >= 0.5
    else:
        raise ValueError(f"unknown label_mode {label_mode!r}")
    names = catalog.features
    records = []
    for row, won in enumerate(first_wins):
        a = Recourse(names[i] for i in first[row])
        b = Recourse(names[i] for i in second[row])
        records.append(RecourseComparison(a, b) if won else RecourseComparison(b, a))
    return records


def centered_mse(estimate: StrengthVector, truth: StrengthVector) -> float:
    """Mean squared error between the two vectors after centering each.

    Centering removes the additive gauge freedom, so the result is invariant
    to adding any constant to either argument.
    """
    if estimate.catalog != truth.catalog:
        raise ValueError("estimate and truth use different catalogs")
    diff = (estimate.values - estimate.values.mean()) - (truth.values - truth.values.mean())
    return float(np.mean(diff**2))


@dataclass(frozen=True, slots=True)
class PairwiseSimConfig:
    """One pairwise parameter-recovery run: a catalog size, a schedule of
    total-comparison budgets, and how many independent trials to average."""

    num_features: int
    comparisons_schedule: tuple[int, ...]
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.num_features < 2:
            raise ValueError(f"num_features must be >= 2, got {self.num_features}")
        schedule = tuple(self.comparisons_schedule)
        object.__setattr__(self, "comparisons_schedule", schedule)
        if not schedule or any(c < 1 for c in schedule):
            raise ValueError("comparisons_schedule must be non-empty positive integers")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ValueError("comparisons_schedule must be strictly increasing")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True, slots=True)
class RecourseSimConfig:
    """One recourse-level parameter-recovery run with a fixed recourse size."""

    recourse_size: int
    comparisons_schedule: tuple[int, ...]
    trials: int
    seed: int
    num_features: int = 20
    label_mode: LabelMode = "bernoulli"

    def __post_init__(self) -> None:
        if self.recourse_size < 1:
            raise ValueError(f"recourse_size must be >= 1, got {self.recourse_size}")
        if 2 * self.recourse_size > self.num_features:
            raise ValueError(
                f"2 * recourse_size ({2 * self.recourse_size}) exceeds "
                f"num_features ({self.num_features}); disjoint sampling impossible"
            )
        schedule = tuple(self.comparisons_schedule)
        object.__setattr__(self, "comparisons_schedule", schedule)
        if not schedule or any(c < 1 for c in schedule):
            raise ValueError("comparisons_schedule must be non-empty positive integers")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ValueError("comparisons_schedule must be strictly increasing")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.label_mode not in ("bernoulli", "deterministic"):
            raise ValueError(f"unknown label_mode {self.label_mode!r}")


@dataclass(frozen=True, slots=True)
class ExperimentRow:
    """One (trial, budget) measurement of the recovery experiment."""

    trial: int
    num_features: int
    recourse_size: int
    total_comparisons: int
    comparisons_per_feature: float
    mse: float
    runtime_ms: float
    converged: bool


@dataclass(frozen=True)
class ExperimentReport:
    """All rows of a recovery experiment, in (trial, schedule) order.

    Every column except ``runtime_ms`` is deterministic given the config.
    ``pseudo_count`` records the estimator regularization used for the fits.
    """

    rows: tuple[ExperimentRow, ...]
    pseudo_count: float

    def __len__(self) -> int:
        return len(self.rows)

    def mse_by_budget(self) -> dict[int, float]:
        """Mean MSE over trials for each total-comparisons budget."""
        sums: dict[int, list[float]] = {}
        for row in self.rows:
            sums.setdefault(row.total_comparisons, []).append(row.mse)
        return {budget: sum(v) / len(v) for budget, v in sorted(sums.items())}

    def median_runtime_by_budget(self) -> dict[int, float]:
        """Median fit runtime (ms) for each total-comparisons budget."""
        groups: dict[int, list[float]] = {}
        for row in self.rows:
            groups.setdefault(row.total_comparisons, []).append(row.runtime_ms)
        return {budget: float(np.median(v)) for budget, v in sorted(groups.items())}


def _fit_timed(
    build_dataset, estimator: EstimatorConfig
) -> tuple[object, float]:
    """Run dataset assembly plus fit under one wall-clock measurement.

    The timed span covers turning raw survey records into tallies and
    estimating strengths from them; both scale with the survey size.
    """
    start = time.perf_counter()
    dataset = build_dataset()
    result = map_estimate(dataset, estimator)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    return result, elapsed_ms


def run_pairwise_experiment(
    config: PairwiseSimConfig, estimator: EstimatorConfig | None = None
) -> ExperimentReport:
    """Recovery experiment on pairwise surveys.

    For each trial: draw ground-truth strengths, then for every schedule
    budget generate a fresh survey (independent seeded stream per point),
    fit, and record the centered MSE against the truth plus the fit's
    wall-clock time. Rows come out in (trial, schedule) order.
    """
    est = estimator or EstimatorConfig()
    rows: list[ExperimentRow] = []
    for trial in range(config.trials):
        truth = draw_true_strengths(config.num_features, derive_seed(config.seed, trial, 0))
        for point, total in enumerate(config.comparisons_schedule):
            survey_seed = derive_seed(config.seed, trial, 1 + point)
            survey = simulate_pairwise_survey(truth, total, survey_seed)
            records = survey.records
            result, elapsed_ms = _fit_timed(
                lambda: ComparisonDataset(truth.catalog, records), est
            )
            rows.append(
                ExperimentRow(
                    trial=trial,
                    num_features=config.num_features,
                    recourse_size=1,
                    total_comparisons=total,
                    comparisons_per_feature=total / config.num_features,
                    mse=centered_mse(result.strengths, truth),
                    runtime_ms=elapsed_ms,
                    converged=result.converged,
                )
            )
    return ExperimentReport(rows=tuple(rows), pseudo_count=est.pseudo_count)


def run_recourse_experiment(
    config: RecourseSimConfig, estimator: EstimatorConfig | None = None
) -> ExperimentReport:
    """Recovery experiment on recourse-level surveys.

    As :func:`run_pairwise_experiment`, but each budget generates a survey of
    whole-recourse comparisons which is expanded into weighted pairwise
    records before fitting. With ``recourse_size == 1`` the generated data,
    fits, and MSE columns are bit-for-bit those of the pairwise experiment
    under the same seed.
    """
    est = estimator or EstimatorConfig()
    rows: list[ExperimentRow] = []
    for trial in range(config.trials):
        truth = draw_true_strengths(config.num_features, derive_seed(config.seed, trial, 0))
        for point, total in enumerate(config.comparisons_schedule):
            survey_seed = derive_seed(config.seed, trial, 1 + point)
            survey = simulate_recourse_survey(
                truth, config.recourse_size, total, survey_seed, config.label_mode
            )
            result, elapsed_ms = _fit_timed(
                lambda: expand_recourse_comparisons(survey, truth.catalog), est
            )
            rows.append(
                ExperimentRow(
                    trial=trial,
                    num_features=config.num_features,
                    recourse_size=config.recourse_size,
                    total_comparisons=total,
                    comparisons_per_feature=total / config.num_features,
                    mse=centered_mse(result.strengths, truth),
                    runtime_ms=elapsed_ms,
                    converged=result.converged,
                )
            )
    return ExperimentReport(rows=tuple(rows), pseudo_count=est.pseudo_count)

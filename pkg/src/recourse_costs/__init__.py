"""Infer per-feature ease-of-modification costs from comparison surveys.

The library models survey answers of the form "feature f is easier to modify
than feature g" (or "recourse R1 is easier than recourse R2") with a
Bradley-Terry model, fits per-feature strengths by regularized
minorization-maximization, and converts them into the numeric costs that
recourse-search algorithms consume. A seeded simulation harness measures how
well the true strengths are recovered as survey size grows.
"""

from .core import (
    ComparisonDataset,
    CostVector,
    FeatureCatalog,
    IdealCheck,
    MonteCarloSettings,
    NoComparisonDataError,
    NotComparableError,
    PairwiseComparison,
    Recourse,
    RecourseComparison,
    RecourseComparisonOutcome,
    StrengthVector,
    compare_recourses,
    costs_from_strengths,
    empirical_pair_prob,
    is_ideal,
    pairwise_prob,
    recourse_prob,
    recourse_prob_mc,
    strengths_from_costs,
)
from .inference import (
    EstimateResult,
    EstimatorConfig,
    NotIdentifiableError,
    expand_recourse_comparisons,
    log_posterior,
    map_estimate,
)
from .simulation import (
    ExperimentReport,
    ExperimentRow,
    PairwiseSimConfig,
    RecourseSimConfig,
    centered_mse,
    default_catalog,
    derive_seed,
    draw_true_strengths,
    run_pairwise_experiment,
    run_recourse_experiment,
    simulate_pairwise_survey,
    simulate_recourse_survey,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "FeatureCatalog",
    "StrengthVector",
    "CostVector",
    "Recourse",
    "PairwiseComparison",
    "RecourseComparison",
    "ComparisonDataset",
    "MonteCarloSettings",
    "RecourseComparisonOutcome",
    "IdealCheck",
    "NotComparableError",
    "NoComparisonDataError",
    "pairwise_prob",
    "empirical_pair_prob",
    "recourse_prob",
    "recourse_prob_mc",
    "costs_from_strengths",
    "strengths_from_costs",
    "compare_recourses",
    "is_ideal",
    # inference
    "EstimatorConfig",
    "EstimateResult",
    "NotIdentifiableError",
    "map_estimate",
    "expand_recourse_comparisons",
    "log_posterior",
    # simulation
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

"""MAP estimation of Bradley-Terry strengths from weighted comparison data.

The estimator runs the classic minorization-maximization fixed point on the
latent weights ``w_f = exp(beta_f)``, with a symmetric pseudo-count prior:
``pseudo_count`` virtual comparisons, split evenly, between every unordered
feature pair. The pseudo-counts make the regularized objective strictly
concave in the zero-mean gauge, so the fixed point is the unique MAP
optimum, and they keep the comparison graph connected even when the survey
never touched some pairs.

All updates run in log space (`logaddexp` / log-sum-exp), so the latent
weights are never materialized and nothing overflows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .core import (
    ComparisonDataset,
    FeatureCatalog,
    PairwiseComparison,
    RecourseComparison,
    StrengthVector,
)

__all__ = [
    "NotIdentifiableError",
    "EstimatorConfig",
    "EstimateResult",
    "map_estimate",
    "expand_recourse_comparisons",
    "log_posterior",
]


class NotIdentifiableError(ValueError):
    """The unregularized likelihood has no finite maximizer for this dataset."""


@dataclass(frozen=True, slots=True)
class EstimatorConfig:
    """Knobs for the MM estimator.

    ``pseudo_count`` is the prior weight lambda: lambda virtual comparisons
    per unordered feature pair, half won by each side. ``tolerance`` bounds
    the max absolute strength change per iteration at convergence. The output
    gauge is always zero-mean.
    """

    pseudo_count: float = 0.1
    tolerance: float = 1e-8
    max_iterations: int = 10_000

    def __post_init__(self) -> None:
        if not self.pseudo_count >= 0.0:
            raise ValueError(f"pseudo_count must be >= 0, got {self.pseudo_count!r}")
        if not self.tolerance > 0.0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")


@dataclass(frozen=True)
class EstimateResult:
    """Fitted strengths in the zero-mean gauge, plus convergence diagnostics.

    ``log_posterior_trace`` holds the regularized log-likelihood after each
    iteration; the MM construction guarantees it is non-decreasing.
    """

    strengths: StrengthVector
    iterations: int
    converged: bool
    final_delta: float
    log_posterior: float
    log_posterior_trace: tuple[float, ...] = field(repr=False)


def _connected(tallies: np.ndarray) -> bool:
    """True when the undirected compared-at-least-once graph is connected."""
    n = tallies.shape[0]
    adjacency = (tallies + tallies.T) > 0
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(adjacency[i]):
            if not seen[j]:
                seen[j] = True
                stack.append(int(j))
    return bool(seen.all())


def log_posterior(dataset: ComparisonDataset, beta: StrengthVector, pseudo_count: float) -> float:
    """Regularized log-likelihood of strengths given tallied comparison data.

    Sum over ordered pairs (f, g), f != g, of
    ``(W_fg + pseudo_count / 2) * log p_fg`` with ``p_fg`` the pairwise win
    probability under ``beta``. Gauge-invariant.
    """
    wins = dataset.win_matrix
    b = beta.values
    log_pair_sum = np.logaddexp.outer(b, b)
    log_p = b[:, None] - log_pair_sum
    weights = wins + pseudo_count / 2.0
    off_diag = ~np.eye(len(b), dtype=bool)
    return float(np.sum(weights[off_diag] * log_p[off_diag]))


def map_estimate(dataset: ComparisonDataset, config: EstimatorConfig | None = None) -> EstimateResult:
    """Fit zero-mean strengths to a comparison dataset by regularized MM.

    Each iteration applies, simultaneously for every feature f,

        w_f  <-  (pseudo wins of f) / sum_{g != f} N~_fg / (w_f + w_g)

    where N~_fg is the tallied comparison weight between f and g plus the
    pseudo-count, then recenters beta = log w to zero mean. Stops when the
    max absolute change in beta falls to ``tolerance`` or after
    ``max_iterations`` (in which case the best iterate is returned with
    ``converged=False`` rather than raised, so callers can still inspect it).

    Raises NotIdentifiableError when ``pseudo_count == 0`` and the data
    cannot pin down a finite optimum: a disconnected comparison graph, or a
    feature with no wins or no losses at all.
    """
    cfg = config or EstimatorConfig()
    catalog = dataset.catalog
    n = catalog.size
    lam = cfg.pseudo_count
    wins = dataset.win_matrix

    total_weight = float(wins.sum())
    if total_weight <= 0.0 and lam == 0.0:
        raise ValueError("dataset has no records and pseudo_count is 0: nothing to fit")
    if lam == 0.0:
        if not _connected(wins):
            raise NotIdentifiableError(
                "comparison graph is disconnected and pseudo_count is 0; "
                "strengths across components are not identifiable"
            )
        no_win = np.flatnonzero(wins.sum(axis=1) == 0.0)
        no_loss = np.flatnonzero(wins.sum(axis=0) == 0.0)
        if no_win.size or no_loss.size:
            bad = sorted({catalog.features[i] for i in np.concatenate([no_win, no_loss])})
            raise NotIdentifiableError(
                f"features {bad} never won or never lost; with pseudo_count 0 "
                "their maximum-likelihood strengths are unbounded"
            )

    off_diag = ~np.eye(n, dtype=bool)
    pseudo_wins = wins.sum(axis=1) + lam / 2.0 * (n - 1)
    tallies = wins + wins.T + lam
    with np.errstate(divide="ignore"):
        log_tallies = np.where(off_diag, np.log(tallies), -np.inf)
    log_pseudo_wins = np.log(pseudo_wins)

    beta = np.zeros(n)
    trace: list[float] = []
    converged = False
    delta = np.inf
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        log_pair_sum = np.logaddexp.outer(beta, beta)
        # log sum_g N~_fg / (w_f + w_g), row-wise log-sum-exp
        terms = log_tallies - log_pair_sum
        row_max = terms.max(axis=1)
        log_denom = row_max + np.log(np.sum(np.exp(terms - row_max[:, None]), axis=1))
        new_beta = log_pseudo_wins - log_denom
        new_beta -= new_beta.mean()
        delta = float(np.max(np.abs(new_beta - beta)))
        beta = new_beta
        trace.append(_log_posterior_from_tallies(wins, beta, lam, off_diag))
        if delta <= cfg.tolerance:
            converged = True
            break

    strengths = StrengthVector(catalog, beta)
    return EstimateResult(
        strengths=strengths,
        iterations=iterations,
        converged=converged,
        final_delta=delta,
        log_posterior=trace[-1],
        log_posterior_trace=tuple(trace),
    )


def _log_posterior_from_tallies(
    wins: np.ndarray, beta: np.ndarray, lam: float, off_diag: np.ndarray
) -> float:
    log_pair_sum = np.logaddexp.outer(beta, beta)
    log_p = beta[:, None] - log_pair_sum
    weights = wins + lam / 2.0
    return float(np.sum(weights[off_diag] * log_p[off_diag]))


def expand_recourse_comparisons(
    records: Iterable[RecourseComparison],
    catalog: FeatureCatalog,
) -> ComparisonDataset:
    """Turn recourse-level comparisons into weighted feature-level ones.

    Every record R1 > R2 becomes one pairwise win (f over g) for each
    f in R1\\R2 and g in R2\\R1, each carrying weight 1 / (|R1| * |R2|).
    Shared features produce no pairs. Emission order is deterministic:
    record order, then catalog order of f, then of g.

    Records whose difference sets are empty (one recourse inside the other)
    carry no pairwise information; they are skipped and reported with a
    single warning.
    """
    index_of = catalog.index_of
    pairs: list[PairwiseComparison] = []
    skipped = 0
    for record in records:
        for rec in (record.winner, record.loser):
            unknown = [f for f in rec.features if f not in catalog]
            if unknown:
                raise ValueError(f"recourse features not in catalog: {sorted(unknown)}")
        winners = sorted(record.winner.features - record.loser.features, key=index_of)
        losers = sorted(record.loser.features - record.winner.features, key=index_of)
        if not winners or not losers:
            skipped += 1
            continue
        weight = 1.0 / (len(record.winner) * len(record.loser))
        for f in winners:
            for g in losers:
                pairs.append(PairwiseComparison(f, g, weight))
    if skipped:
        warnings.warn(
            f"skipped {skipped} recourse comparison(s) where one side contained "
            "the other; they carry no pairwise information",
            stacklevel=2,
        )
    return ComparisonDataset(catalog, pairs)

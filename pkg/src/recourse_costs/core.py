"""Domain types and closed-form Bradley-Terry math over feature catalogs.

Each feature carries a latent log-scale strength ``beta``: feature ``f`` is
judged easier to modify than feature ``g`` with probability
``logistic(beta_f - beta_g)``. A *cost* is the additive inverse of a strength,
so lower cost means easier to modify. Strengths are identifiable only up to a
shared additive constant, and every operation here is invariant under that
shift.

All probability math runs on the log scale with a saturation-guarded
logistic, so strengths are never exponentiated directly and results stay
strictly inside (0, 1) even for extreme inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

__all__ = [
    "RESERVED_SEPARATORS",
    "NotComparableError",
    "NoComparisonDataError",
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
    "pairwise_prob",
    "empirical_pair_prob",
    "recourse_prob",
    "recourse_prob_mc",
    "costs_from_strengths",
    "strengths_from_costs",
    "compare_recourses",
    "is_ideal",
]

# Separators reserved by the CSV file formats; feature ids must avoid them.
RESERVED_SEPARATORS = (",", ";")

# Closest doubles to 0 and 1 inside the open unit interval. The logistic
# saturates in float arithmetic once |x| exceeds ~37; clamping keeps the
# returned probability strictly inside (0, 1) for any finite strengths.
_P_LO = 5e-324
_P_HI = math.nextafter(1.0, 0.0)


class NotComparableError(ValueError):
    """Two recourses cannot be ranked: one is a subset of the other (or equal)."""


class NoComparisonDataError(ValueError):
    """An empirical probability was requested for a never-compared pair.

    Distinct from a legitimate 0.0 probability, which means the pair was
    compared and one side never won.
    """


class FeatureCatalog:
    """Ordered, immutable collection of feature identifiers.

    Identifiers must be unique, non-empty, and free of the reserved
    separators used by the file formats. Order is significant: it fixes the
    layout of strength/cost vectors and the deterministic iteration order of
    every set-valued operation.
    """

    __slots__ = ("_features", "_index")

    def __init__(self, features: Iterable[str]) -> None:
        feats = tuple(features)
        if len(feats) < 2:
            raise ValueError(f"catalog needs at least 2 features, got {len(feats)}")
        index: dict[str, int] = {}
        for pos, name in enumerate(feats):
            if not isinstance(name, str) or not name:
                raise ValueError(f"feature at position {pos} must be a non-empty string")
            if any(sep in name for sep in RESERVED_SEPARATORS):
                raise ValueError(f"feature {name!r} contains a reserved separator")
            if name in index:
                raise ValueError(f"duplicate feature {name!r}")
            index[name] = pos
        self._features = feats
        self._index = index

    @property
    def features(self) -> tuple[str, ...]:
        return self._features

    @property
    def size(self) -> int:
        return len(self._features)

    def index_of(self, feature: str) -> int:
        try:
            return self._index[feature]
        except KeyError:
            raise KeyError(f"feature {feature!r} not in catalog") from None

    def __len__(self) -> int:
        return len(self._features)

    def __iter__(self) -> Iterator[str]:
        return iter(self._features)

    def __contains__(self, feature: object) -> bool:
        return feature in self._index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureCatalog):
            return NotImplemented
        return self._features == other._features

    def __hash__(self) -> int:
        return hash(self._features)

    def __repr__(self) -> str:
        return f"FeatureCatalog({list(self._features)!r})"


class _FeatureValues:
    """One finite float per catalog feature, in catalog order. Immutable."""

    __slots__ = ("_catalog", "_values")

    def __init__(self, catalog: FeatureCatalog, values: Sequence[float] | np.ndarray) -> None:
        arr = np.array(values, dtype=float)
        if arr.shape != (catalog.size,):
            raise ValueError(
                f"expected {catalog.size} values for catalog of size {catalog.size}, "
                f"got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("all values must be finite")
        arr.setflags(write=False)
        self._catalog = catalog
        self._values = arr

    @property
    def catalog(self) -> FeatureCatalog:
        return self._catalog

    @property
    def values(self) -> np.ndarray:
        return self._values

    def value_of(self, feature: str) -> float:
        return float(self._values[self._catalog.index_of(feature)])

    def as_dict(self) -> dict[str, float]:
        return {f: float(v) for f, v in zip(self._catalog, self._values)}

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        pairs = ", ".join(f"{f}={v:.4g}" for f, v in zip(self._catalog, self._values))
        return f"{type(self).__name__}({pairs})"


class StrengthVector(_FeatureValues):
    """Per-feature log-strengths ``beta``.

    Semantics are invariant under adding one constant to every entry (the
    gauge freedom); consumers either inherit that invariance or document
    their gauge convention explicitly.
    """

    def shifted(self, constant: float) -> StrengthVector:
        """Same strengths with ``constant`` added everywhere (gauge shift)."""
        return StrengthVector(self._catalog, self._values + constant)

    def centered(self) -> StrengthVector:
        """Equivalent strengths in the zero-mean gauge."""
        return StrengthVector(self._catalog, self._values - self._values.mean())


class CostVector(_FeatureValues):
    """Per-feature modification costs: the additive inverse of strengths."""


class Recourse:
    """A non-empty set of features whose joint modification flips a prediction."""

    __slots__ = ("_features",)

    def __init__(self, features: Iterable[str]) -> None:
        fs = frozenset(features)
        if not fs:
            raise ValueError("a recourse must modify at least one feature")
        for name in fs:
            if not isinstance(name, str) or not name:
                raise ValueError("recourse features must be non-empty strings")
        self._features = fs

    @property
    def features(self) -> frozenset[str]:
        return self._features

    def ordered(self, catalog: FeatureCatalog) -> tuple[str, ...]:
        """Members sorted by catalog position (deterministic iteration order)."""
        return tuple(sorted(self._features, key=catalog.index_of))

    def __len__(self) -> int:
        return len(self._features)

    def __iter__(self) -> Iterator[str]:
        return iter(self._features)

    def __contains__(self, feature: object) -> bool:
        return feature in self._features

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Recourse):
            return NotImplemented
        return self._features == other._features

    def __hash__(self) -> int:
        return hash(self._features)

    def __repr__(self) -> str:
        return f"Recourse({{{', '.join(map(repr, sorted(self._features)))}}})"


@dataclass(frozen=True, slots=True)
class PairwiseComparison:
    """One survey record: ``winner`` was judged easier to modify than ``loser``.

    ``weight`` is the record's multiplicity; fractional weights arise when
    recourse-level comparisons are expanded into feature pairs.
    """

    winner: str
    loser: str
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.winner == self.loser:
            raise ValueError(f"comparison of feature {self.winner!r} with itself")
        if not (self.weight > 0.0 and math.isfinite(self.weight)):
            raise ValueError(f"weight must be positive and finite, got {self.weight!r}")


@dataclass(frozen=True, slots=True)
class RecourseComparison:
    """One survey record: ``winner`` recourse was judged easier than ``loser``."""

    winner: Recourse
    loser: Recourse

    def __post_init__(self) -> None:
        if self.winner.features == self.loser.features:
            raise ValueError("a recourse cannot be compared with itself")


class ComparisonDataset:
    """Pairwise survey records plus their tallied win weights.

    The tallies are derived state: ``win_weight(f, g)`` is exactly the sum of
    the weights of records where ``f`` beat ``g``, accumulated in record
    order, so they are recomputable from ``records`` bit for bit.
    """

    __slots__ = ("_catalog", "_records", "_wins")

    def __init__(self, catalog: FeatureCatalog, records: Iterable[PairwiseComparison]) -> None:
        recs = tuple(records)
        n = catalog.size
        index = catalog._index  # hot path: one dict lookup per endpoint
        winner_idx = np.empty(len(recs), dtype=np.intp)
        loser_idx = np.empty(len(recs), dtype=np.intp)
        weights = np.empty(len(recs), dtype=float)
        try:
            for k, rec in enumerate(recs):
                winner_idx[k] = index[rec.winner]
                loser_idx[k] = index[rec.loser]
                weights[k] = rec.weight
        except KeyError as exc:
            raise ValueError(f"record {k} refers to unknown feature {exc.args[0]!r}") from None
        wins = np.zeros((n, n), dtype=float)
        np.add.at(wins, (winner_idx, loser_idx), weights)
        wins.setflags(write=False)
        self._catalog = catalog
        self._records = recs
        self._wins = wins

    @property
    def catalog(self) -> FeatureCatalog:
        return self._catalog

    @property
    def records(self) -> tuple[PairwiseComparison, ...]:
        return self._records

    @property
    def win_matrix(self) -> np.ndarray:
        """Matrix W with W[i, j] = total weight of feature i beating feature j."""
        return self._wins

    def win_weight(self, winner: str, loser: str) -> float:
        return float(self._wins[self._catalog.index_of(winner), self._catalog.index_of(loser)])

    def total_weight(self, f: str, g: str) -> float:
        """Total weight of comparisons between ``f`` and ``g``, either direction."""
        i, j = self._catalog.index_of(f), self._catalog.index_of(g)
        return float(self._wins[i, j] + self._wins[j, i])

    def __len__(self) -> int:
        return len(self._records)

    def __repr__(self) -> str:
        return (
            f"ComparisonDataset({self._catalog.size} features, "
            f"{len(self._records)} records)"
        )


def _logistic(x: float) -> float:
    """Stable logistic clamped to the open interval (0, 1)."""
    if x >= 0.0:
        p = 1.0 / (1.0 + math.exp(-x))
    else:
        z = math.exp(x)
        p = z / (1.0 + z)
    return min(max(p, _P_LO), _P_HI)


def _logistic_array(x: np.ndarray) -> np.ndarray:
    """Vectorized stable logistic, clamped to (0, 1). Used by samplers."""
    out = np.empty_like(x, dtype=float)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    z = np.exp(x[~pos])
    out[~pos] = z / (1.0 + z)
    return np.clip(out, _P_LO, _P_HI)


def pairwise_prob(beta_f: float, beta_g: float) -> float:
    """Probability that the feature with strength ``beta_f`` beats ``beta_g``.

    Equal to ``exp(beta_f) / (exp(beta_f) + exp(beta_g))`` but computed as
    ``logistic(beta_f - beta_g)``, so it depends only on the difference and
    never overflows.
    """
    if not (math.isfinite(beta_f) and math.isfinite(beta_g)):
        raise ValueError(f"strengths must be finite, got ({beta_f!r}, {beta_g!r})")
    return _logistic(beta_f - beta_g)


def empirical_pair_prob(dataset: ComparisonDataset, f: str, g: str) -> float:
    """Relative frequency with which ``f`` beat ``g`` in the dataset.

    Raises NoComparisonDataError when the pair was never compared; that case
    must not be conflated with an observed probability of zero.
    """
    if f == g:
        raise ValueError(f"cannot compare feature {f!r} with itself")
    won = dataset.win_weight(f, g)
    total = won + dataset.win_weight(g, f)
    if total == 0.0:
        raise NoComparisonDataError(f"no recorded comparisons between {f!r} and {g!r}")
    return won / total


def _difference_sets(
    r1: Recourse, r2: Recourse, catalog: FeatureCatalog
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Catalog-ordered set differences R1\\R2 and R2\\R1, validated and non-empty."""
    for rec in (r1, r2):
        unknown = [f for f in rec.features if f not in catalog]
        if unknown:
            raise ValueError(f"recourse features not in catalog: {sorted(unknown)}")
    only1 = tuple(sorted(r1.features - r2.features, key=catalog.index_of))
    only2 = tuple(sorted(r2.features - r1.features, key=catalog.index_of))
    if not only1 or not only2:
        raise NotComparableError(
            "recourses are not comparable: one is contained in the other "
            f"({sorted(r1.features)} vs {sorted(r2.features)})"
        )
    return only1, only2


def recourse_prob(r1: Recourse, r2: Recourse, beta: StrengthVector) -> float:
    """Probability that recourse ``r1`` is easier overall than ``r2``.

    Averages the pairwise win probability over every cross pair of features
    the two recourses do not share: with m = |r1|, n = |r2| and k shared
    features, the (m-k)(n-k) pairs (f, g) with f only in r1 and g only in r2.
    Shared features cancel and contribute nothing. Satisfies
    ``recourse_prob(r1, r2) + recourse_prob(r2, r1) == 1``.
    """
    only1, only2 = _difference_sets(r1, r2, beta.catalog)
    values = beta.values
    idx = beta.catalog.index_of
    total = 0.0
    for f in only1:
        bf = values[idx(f)]
        for g in only2:
            total += _logistic(bf - values[idx(g)])
    return total / (len(only1) * len(only2))


def recourse_prob_mc(
    r1: Recourse,
    r2: Recourse,
    beta: StrengthVector,
    samples: int,
    seed: int,
) -> float:
    """Monte Carlo estimate of :func:`recourse_prob`.

    Draws ``samples`` cross pairs uniformly at random from the two difference
    sets (seeded, hence reproducible) and averages their pairwise win
    probabilities. The standard error is at most ``1 / (2 * sqrt(samples))``.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    only1, only2 = _difference_sets(r1, r2, beta.catalog)
    idx = beta.catalog.index_of
    b1 = np.array([beta.values[idx(f)] for f in only1])
    b2 = np.array([beta.values[idx(g)] for g in only2])
    rng = np.random.default_rng(seed)
    i = rng.integers(0, len(b1), size=samples)
    j = rng.integers(0, len(b2), size=samples)
    return float(np.mean(_logistic_array(b1[i] - b2[j])))


def costs_from_strengths(beta: StrengthVector) -> CostVector:
    """Convert strengths to costs: cost(f) = -beta(f)."""
    return CostVector(beta.catalog, -beta.values)


def strengths_from_costs(costs: CostVector) -> StrengthVector:
    """Inverse of :func:`costs_from_strengths`: beta(f) = -cost(f)."""
    return StrengthVector(costs.catalog, -costs.values)


@dataclass(frozen=True, slots=True)
class MonteCarloSettings:
    """Sampling budget and seed for Monte Carlo recourse comparison."""

    samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples}")


@dataclass(frozen=True, slots=True)
class RecourseComparisonOutcome:
    """Both win probabilities for an ordered recourse pair, plus the verdict."""

    rho_12: float
    rho_21: float
    easier: Literal["r1", "r2", "tie"]


def compare_recourses(
    r1: Recourse,
    r2: Recourse,
    costs: CostVector,
    mc: MonteCarloSettings | None = None,
    tie_epsilon: float = 1e-12,
) -> RecourseComparisonOutcome:
    """Decide which of two recourses is easier under the given feature costs.

    Computes rho_12 exactly, or by Monte Carlo when ``mc`` is given, and
    labels the pair a tie when rho_12 is within ``tie_epsilon`` of 1/2 so
    symmetric inputs are reported as symmetric rather than arbitrarily won.
    """
    beta = strengths_from_costs(costs)
    if mc is None:
        rho_12 = recourse_prob(r1, r2, beta)
    else:
        rho_12 = recourse_prob_mc(r1, r2, beta, mc.samples, mc.seed)
    rho_21 = 1.0 - rho_12
    if abs(rho_12 - 0.5) < tie_epsilon:
        easier: Literal["r1", "r2", "tie"] = "tie"
    elif rho_12 > 0.5:
        easier = "r1"
    else:
        easier = "r2"
    return RecourseComparisonOutcome(rho_12=rho_12, rho_21=rho_21, easier=easier)


@dataclass(frozen=True, slots=True)
class IdealCheck:
    """Result of an ideality check: the first beating alternative, if any.

    ``skipped`` lists alternatives that could not be compared (subset or
    equal recourses); they neither confirm nor refute ideality.
    """

    ideal: bool
    witness: Recourse | None
    skipped: tuple[Recourse, ...]


def is_ideal(
    r: Recourse,
    alternatives: Sequence[Recourse],
    costs: CostVector,
) -> IdealCheck:
    """Check whether no alternative recourse is strictly easier than ``r``.

    Scans ``alternatives`` in order and returns non-ideal with the first
    witness whose win probability over ``r`` exceeds 1/2. An empty
    alternatives list is vacuously ideal.
    """
    beta = strengths_from_costs(costs)
    skipped: list[Recourse] = []
    for alt in alternatives:
        try:
            rho = recourse_prob(r, alt, beta)
        except NotComparableError:
            skipped.append(alt)
            continue
        if rho < 0.5:
            return IdealCheck(ideal=False, witness=alt, skipped=tuple(skipped))
    return IdealCheck(ideal=True, witness=None, skipped=tuple(skipped))

"""Classification and interpretability metrics.

Covers macro-averaged F1, edit distance between feature rankings (treated as
symbol strings), and the weighted interpretability score (WIS) used by the
feature-poisoning study, together with its Monte-Carlo random-ranking baseline.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import StructuralError


@dataclass(frozen=True)
class RankedFeatureList:
    """Features ordered most to least important, with their scores.

    ``order`` is a permutation of feature identifiers; ``scores`` is aligned
    with ``order`` and non-increasing.  Ties are broken by ascending feature
    index so rankings are deterministic.
    """

    order: tuple[int, ...]
    scores: tuple[float, ...]
    names: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if len(self.order) != len(self.scores):
            raise StructuralError("order and scores must have equal length")
        if sorted(self.order) != list(range(len(self.order))):
            raise StructuralError("order must be a permutation of 0..n-1")
        if any(s < 0 for s in self.scores):
            raise StructuralError("importance scores must be nonnegative")
        if any(a < b for a, b in zip(self.scores, self.scores[1:])):
            raise StructuralError("scores must be non-increasing along the ranking")

    def __len__(self) -> int:
        return len(self.order)

    @staticmethod
    def from_scores(scores: Sequence[float], names: Sequence[str] = ()) -> "RankedFeatureList":
        """Rank features by descending score, ties broken by ascending index."""
        arr = np.asarray(scores, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise StructuralError("scores must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise StructuralError("scores must be finite and nonnegative")
        order = sorted(range(arr.size), key=lambda j: (-arr[j], j))
        return RankedFeatureList(
            order=tuple(order),
            scores=tuple(float(arr[j]) for j in order),
            names=tuple(names),
        )


def macro_f1(predictions: Sequence[int], truth: Sequence[int]) -> float:
    """Unweighted mean of per-class F1 over the classes present in the truth."""
    pred = np.asarray(predictions)
    true = np.asarray(truth)
    if pred.size == 0 or true.size == 0:
        raise StructuralError("macro_f1 needs nonempty inputs")
    if pred.shape != true.shape:
        raise StructuralError(f"length mismatch: {pred.shape} vs {true.shape}")
    scores = []
    for cls in np.unique(true):
        tp = np.sum((pred == cls) & (true == cls))
        fp = np.sum((pred == cls) & (true != cls))
        fn = np.sum((pred != cls) & (true == cls))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom > 0 else 0.0)
    return float(np.mean(scores))


def _require_same_universe(a: RankedFeatureList, b: RankedFeatureList) -> None:
    if set(a.order) != set(b.order):
        raise StructuralError("rankings are over different feature universes")


def edit_distance(a: RankedFeatureList, b: RankedFeatureList, damerau: bool = False) -> int:
    """Levenshtein distance between two rankings treated as symbol strings.

    Unit cost for insertion, deletion, and substitution.  With
    ``damerau=True`` adjacent transpositions also cost one step (sensitivity
    variant; the default interpretation reads "swap" as substitution).
    """
    _require_same_universe(a, b)
    return levenshtein(a.order, b.order, damerau=damerau)


def levenshtein(a: Sequence, b: Sequence, damerau: bool = False) -> int:
    """Standard dynamic-programming edit distance between two sequences."""
    n, m = len(a), len(b)
    prev_prev: list[int] = []
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if (
                damerau
                and i > 1
                and j > 1
                and a[i - 1] == b[j - 2]
                and a[i - 2] == b[j - 1]
            ):
                cur[j] = min(cur[j], prev_prev[j - 2] + 1)
        prev_prev, prev = prev, cur
    return prev[m]


def wis(ranking: RankedFeatureList, informative: Iterable[int], k: int | None = None) -> float:
    """Weighted interpretability score of a ranking against an informative set.

    Takes the top-k ranked features, normalizes their scores to unit sum
    (uniform weights if the top-k scores are all zero), and adds each weight
    when the feature is informative, subtracting it otherwise.  Result lies in
    [-1, 1]; k defaults to the size of the informative set.
    """
    informative_set = set(informative)
    if not informative_set:
        raise StructuralError("informative feature set must be nonempty")
    if not informative_set.issubset(set(ranking.order)):
        raise StructuralError("informative set contains unknown feature ids")
    if k is None:
        k = len(informative_set)
    if not 1 <= k <= len(ranking):
        raise StructuralError(f"k={k} out of range for {len(ranking)} features")

    top = ranking.order[:k]
    weights = np.asarray(ranking.scores[:k], dtype=float)
    total = weights.sum()
    if total <= 0.0:
        weights = np.full(k, 1.0 / k)
    else:
        weights = weights / total
    signs = np.array([1.0 if f in informative_set else -1.0 for f in top])
    return float(np.sum(signs * weights))


def random_wis_baseline(
    n_features: int,
    informative: Iterable[int],
    k: int | None = None,
    trials: int = 100_000,
    seed: int = 0,
) -> float:
    """Monte-Carlo mean WIS of uniformly random rankings with uniform scores."""
    if trials < 1:
        raise StructuralError("trials must be >= 1")
    informative_set = set(informative)
    if not informative_set:
        raise StructuralError("informative feature set must be nonempty")
    if k is None:
        k = len(informative_set)
    mask = np.zeros(n_features)
    mask[list(informative_set)] = 1.0
    rng = np.random.default_rng(seed)
    # Argsort of i.i.d. uniforms draws a uniformly random permutation per row.
    # With uniform scores the WIS of one permutation is
    # (informative-in-top-k - rest-in-top-k) / k.
    top = np.argsort(rng.random((trials, n_features)), axis=1)[:, :k]
    hits = mask[top].sum(axis=1)
    return float(np.mean((2.0 * hits - k) / k))


def write_ranking_csv(ranking: RankedFeatureList, path: str | Path) -> None:
    """Serialize a ranking as rank,feature_id,feature_name,score rows."""
    names = ranking.names if ranking.names else tuple(f"f{j}" for j in range(len(ranking)))
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rank", "feature_id", "feature_name", "score"])
        for rank, (fid, score) in enumerate(zip(ranking.order, ranking.scores)):
            writer.writerow([rank, fid, names[fid], repr(float(score))])


def read_ranking_csv(path: str | Path) -> RankedFeatureList:
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    order = tuple(int(r["feature_id"]) for r in rows)
    scores = tuple(float(r["score"]) for r in rows)
    names_by_id = {int(r["feature_id"]): r["feature_name"] for r in rows}
    names = tuple(names_by_id[j] for j in sorted(names_by_id))
    return RankedFeatureList(order=order, scores=scores, names=names)

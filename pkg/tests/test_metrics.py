import itertools

import numpy as np
import pytest

from quditnn.errors import StructuralError
from quditnn.metrics import (
    RankedFeatureList,
    edit_distance,
    levenshtein,
    macro_f1,
    random_wis_baseline,
    read_ranking_csv,
    wis,
    write_ranking_csv,
)


def reference_levenshtein(a, b):
    """Independent memoized recursion straight from the definition."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def dist(i, j):
        if i == 0:
            return j
        if j == 0:
            return i
        sub = dist(i - 1, j - 1) + (a[i - 1] != b[j - 1])
        return min(dist(i - 1, j) + 1, dist(i, j - 1) + 1, sub)

    return dist(len(a), len(b))


def ranking(order, scores=None, names=()):
    if scores is None:
        scores = tuple(float(len(order) - i) for i in range(len(order)))
    return RankedFeatureList(order=tuple(order), scores=tuple(scores), names=tuple(names))


# --- macro F1 ------------------------------------------------------------------


def test_macro_f1_perfect_and_inverted():
    y = np.array([0, 1, 0, 1, 1])
    assert macro_f1(y, y) == 1.0
    assert macro_f1(1 - y, y) == 0.0


def test_macro_f1_majority_collapse():
    truth = np.array([0] * 80 + [1] * 20)
    preds = np.zeros(100, dtype=int)
    # F1 for class 0 is 2*80/(2*80+20) = 8/9; class 1 scores 0
    assert macro_f1(preds, truth) == pytest.approx((8 / 9) / 2)


def test_macro_f1_label_permutation_invariance():
    rng = np.random.default_rng(0)
    truth = rng.integers(0, 2, 60)
    preds = rng.integers(0, 2, 60)
    assert macro_f1(preds, truth) == macro_f1(1 - preds, 1 - truth)


def test_macro_f1_validation():
    with pytest.raises(StructuralError):
        macro_f1([], [])
    with pytest.raises(StructuralError):
        macro_f1([0, 1], [0, 1, 1])


# --- edit distance -------------------------------------------------------------


def test_edit_distance_identity_and_reversal():
    a = ranking((0, 1, 2))
    assert edit_distance(a, a) == 0
    assert edit_distance(a, ranking((2, 1, 0))) == 2


def test_edit_distance_universe_check():
    with pytest.raises(StructuralError):
        edit_distance(ranking((0, 1, 2)), ranking((0, 1)))


def test_damerau_flag_counts_transposition_once():
    a = ranking((0, 1))
    b = ranking((1, 0))
    assert edit_distance(a, b) == 2
    assert edit_distance(a, b, damerau=True) == 1


def test_levenshtein_against_reference_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        n, m = rng.integers(0, 9, size=2)
        a = tuple(rng.integers(0, 5, size=n))
        b = tuple(rng.integers(0, 5, size=m))
        assert levenshtein(a, b) == reference_levenshtein(a, b)


def test_edit_distance_metric_axioms():
    rng = np.random.default_rng(2)
    perms = [tuple(rng.permutation(8)) for _ in range(12)]
    for p, q, r in itertools.islice(itertools.product(perms, repeat=3), 300):
        d_pq = levenshtein(p, q)
        assert d_pq == levenshtein(q, p)
        assert (d_pq == 0) == (p == q)
        assert d_pq <= levenshtein(p, r) + levenshtein(r, q)
        assert d_pq <= len(p)


# --- WIS -----------------------------------------------------------------------


def test_wis_extremes():
    r = ranking((0, 1, 2, 3, 4))
    assert wis(r, informative={0, 1}) == 1.0
    assert wis(r, informative={3, 4}, k=2) == -1.0


def test_wis_weighted_arithmetic():
    r = ranking((0, 1, 2, 3, 4), scores=(0.4, 0.3, 0.2, 0.1, 0.0))
    assert wis(r, informative={0, 2}, k=4) == pytest.approx(0.4 - 0.3 + 0.2 - 0.1)
    assert wis(r, informative={0, 2, 3}, k=4) == pytest.approx(0.4 - 0.3 + 0.2 + 0.1)


def test_wis_zero_scores_fall_back_to_uniform():
    r = ranking((0, 1, 2, 3), scores=(0.0, 0.0, 0.0, 0.0))
    assert wis(r, informative={0, 1}, k=2) == pytest.approx(1.0)
    assert wis(r, informative={0, 3}, k=2) == pytest.approx(0.0)


def test_wis_scale_invariance():
    scores = (5.0, 3.0, 1.5, 0.5)
    a = ranking((2, 0, 3, 1), scores=scores)
    b = ranking((2, 0, 3, 1), scores=tuple(7.3 * s for s in scores))
    assert wis(a, informative={2, 3}, k=3) == pytest.approx(
        wis(b, informative={2, 3}, k=3)
    )


def test_wis_validation():
    r = ranking((0, 1, 2))
    with pytest.raises(StructuralError):
        wis(r, informative=set())
    with pytest.raises(StructuralError):
        wis(r, informative={7})
    with pytest.raises(StructuralError):
        wis(r, informative={0}, k=4)


def test_random_wis_baseline_all_informative():
    assert random_wis_baseline(6, informative=range(6), trials=50) == 1.0


def test_random_wis_baseline_paper_shape():
    # 16 informative of 23, k = 16: expectation is (16 - 7)/23 = 9/23
    value = random_wis_baseline(23, informative=range(16), trials=100_000, seed=0)
    assert abs(value - 9 / 23) < 0.01


def test_random_wis_baseline_symmetric_case():
    value = random_wis_baseline(10, informative=range(5), k=5, trials=100_000, seed=1)
    assert abs(value) < 0.01


def test_random_wis_baseline_validation():
    with pytest.raises(StructuralError):
        random_wis_baseline(5, informative=range(2), trials=0)


# --- RankedFeatureList ----------------------------------------------------------


def test_from_scores_orders_and_breaks_ties():
    r = RankedFeatureList.from_scores([0.2, 0.9, 0.2, 0.5])
    assert r.order == (1, 3, 0, 2)
    assert r.scores == (0.9, 0.5, 0.2, 0.2)


def test_ranked_list_validation():
    with pytest.raises(StructuralError):
        RankedFeatureList(order=(0, 0, 1), scores=(3.0, 2.0, 1.0))
    with pytest.raises(StructuralError):
        RankedFeatureList(order=(0, 1), scores=(1.0,))
    with pytest.raises(StructuralError):
        RankedFeatureList(order=(0, 1), scores=(1.0, 2.0))
    with pytest.raises(StructuralError):
        RankedFeatureList(order=(0, 1), scores=(1.0, -1.0))
    with pytest.raises(StructuralError):
        RankedFeatureList.from_scores([])
    with pytest.raises(StructuralError):
        RankedFeatureList.from_scores([1.0, np.nan])


def test_ranking_csv_round_trip(tmp_path):
    r = RankedFeatureList.from_scores(
        [0.25, 1.5, 0.0, 0.7], names=("alpha", "beta", "gamma", "delta")
    )
    path = tmp_path / "ranking.csv"
    write_ranking_csv(r, path)
    loaded = read_ranking_csv(path)
    assert loaded == r
    header = path.read_text().splitlines()[0]
    assert header == "rank,feature_id,feature_name,score"

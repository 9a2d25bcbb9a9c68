import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from domainlex.metrics import auc, mcr, roc_curve

from oracles import pairwise_auc


@pytest.mark.parametrize(
    "probs, labels, expected",
    [((0.9, 0.1), (1, 0), 0.0), ((0.9, 0.1), (0, 1), 1.0), ((0.5,), (1,), 1.0), ((0.5,), (0,), 0.0)],
)
def test_mcr_examples(probs, labels, expected):
    assert mcr(probs, labels) == expected


def test_mcr_threshold_and_errors():
    labels = [1, 0, 0, 1, 0]
    probs = [0.3, 0.2, 0.9, 0.6, 0.1]
    assert mcr(probs, labels, threshold=-np.inf) == 3 / 5
    assert mcr(probs, labels, threshold=0.25) == 1 / 5
    with pytest.raises(ValueError):
        mcr([], [])
    with pytest.raises(ValueError):
        mcr([0.1, 0.2], [1])
    with pytest.raises(ValueError):
        mcr([0.1], [2])


def test_auc_examples():
    assert auc((0.9, 0.6, 0.4, 0.2), (1, 1, 0, 0)) == 1.0
    assert auc((0.3, 0.3, 0.3), (1, 0, 1)) == 0.5
    assert auc((0.9, 0.6, 0.4, 0.2), (1, 0, 0, 1)) == 0.5


def test_auc_single_class():
    with pytest.raises(ValueError):
        auc([0.1, 0.2], [1, 1])


def test_roc_examples():
    perfect = roc_curve((0.9, 0.6, 0.4, 0.2), (1, 1, 0, 0))
    assert (0.0, 1.0) in perfect.points
    flat = roc_curve((0.5, 0.5, 0.5), (1, 0, 0))
    assert flat.points == [(0.0, 0.0), (1.0, 1.0)]
    mixed = roc_curve((0.9, 0.6, 0.4, 0.2), (1, 0, 0, 1))
    assert mixed.area() == 0.5
    assert mixed.thresholds[0] == np.inf
    with pytest.raises(ValueError):
        roc_curve([1.0], [0])


scores_labels = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 8).map(float), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n),
    )
).filter(lambda sl: 0 < sum(sl[1]) < len(sl[1]))


@settings(max_examples=300)
@given(scores_labels)
def test_auc_equals_pairwise_oracle(sl):
    s, y = sl
    assert auc(s, y) == pairwise_auc(s, y)


@settings(max_examples=300)
@given(scores_labels)
def test_roc_area_and_shape(sl):
    s, y = sl
    curve = roc_curve(s, y)
    assert abs(curve.area() - auc(s, y)) <= 1e-12
    assert curve.points[0] == (0.0, 0.0) and curve.points[-1] == (1.0, 1.0)
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    assert len(curve.points) == len(set(s)) + 1


@settings(max_examples=200)
@given(scores_labels)
def test_auc_symmetries(sl):
    s, y = sl
    a = auc(s, y)
    flipped = [1 - v for v in y]
    assert a + auc(s, flipped) == pytest.approx(1.0, abs=1e-15)
    assert auc([np.exp(v) * 3 + 1 for v in s], y) == a
    assert auc([-v for v in s], y) == pytest.approx(1 - a, abs=1e-15)


def test_large_random_instances():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 10_001))
        y = rng.integers(0, 2, n)
        y[0], y[1] = 0, 1
        s = rng.integers(0, 50, n) / 7.0
        assert abs(roc_curve(s, y).area() - auc(s, y)) <= 1e-12


def test_mcr_range():
    rng = np.random.default_rng(1)
    p = rng.random(100)
    y = rng.integers(0, 2, 100)
    assert 0.0 <= mcr(p, y) <= 1.0

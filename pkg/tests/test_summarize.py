import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_force_sse, exact_sse_of_labels
from iotpga.core import SummarizationPolicy, SupplierSeries
from iotpga.errors import InsufficientData, InvalidInput, InvalidParameter
from iotpga.summarize import (
    disperse_levels,
    kmeans_1d,
    summarize,
    summarize_all_levels,
    summarize_values,
    transfer_centroids,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
series_st = st.lists(finite, min_size=1, max_size=30)


def test_k1_is_the_mean():
    assert summarize_values([10, 10, 10, 20], 1).tolist() == [12.5] * 4


def test_k_equal_distinct_is_identity():
    assert summarize_values([10, 10, 10, 20], 2).tolist() == [10, 10, 10, 20]


def test_two_clusters_against_enumeration():
    out = summarize_values([1, 2, 9, 10], 2)
    assert out.tolist() == [1.5, 1.5, 9.5, 9.5]
    assert exact_sse_of_labels([1, 2, 9, 10], out) == brute_force_sse([1, 2, 9, 10], 2)


def test_summarize_series_metadata():
    raw = SupplierSeries("a", 3, (4.0, 1.0, 2.0, 9.0))
    s = summarize(raw, 2)
    assert (s.supplier, s.epoch, s.k) == ("a", 3, 2)
    assert len(s) == 4
    assert set(s.values) <= set(s.centroids)
    assert list(s.centroids) == sorted(s.centroids)


def test_errors():
    with pytest.raises(InvalidParameter):
        summarize_values([1, 2, 3], 0)
    with pytest.raises(InvalidParameter):
        summarize_values([1, 2, 3], 1.5)
    with pytest.raises(InsufficientData):
        summarize_values([1, 2, 3], 4)
    with pytest.raises(InvalidInput):
        summarize_values([], 1)
    with pytest.raises(InvalidInput):
        summarize_values([1.0, np.nan], 1)


def test_duplicates_and_order_do_not_matter():
    x = np.array([5, 1, 5, 9, 1, 1, 7, 3])
    rng = np.random.default_rng(1)
    for k in (1, 2, 3, 4):
        base = summarize_values(x, k)
        perm = rng.permutation(x.size)
        assert np.array_equal(summarize_values(x[perm], k), base[perm])


@pytest.mark.parametrize("length", range(1, 7))
def test_exhaustive_small_inputs(length):
    for values in itertools.combinations_with_replacement(range(4), length):
        for k in range(1, min(3, length) + 1):
            out = summarize_values(values, k)
            assert exact_sse_of_labels(values, out) == brute_force_sse(values, k)


@given(series_st, st.integers(1, 6))
def test_properties(values, k):
    k = min(k, len(values))
    out = summarize_values(values, k)
    assert out.shape == (len(values),)
    assert np.unique(out).size <= k
    assert np.array_equal(summarize_values(out, k), out)          # idempotent
    if k >= np.unique(values).size:
        assert np.array_equal(out, np.asarray(values, dtype=float))


@given(series_st)
def test_k1_preserves_the_mean(values):
    out = summarize_values(values, 1)
    mu = np.mean(values)
    assert abs(out.mean() - mu) <= 1e-12 * max(1.0, abs(mu)) + 1e-9 * np.ptp(values)


@given(st.lists(st.integers(0, 50), min_size=2, max_size=12), st.integers(1, 5))
def test_nearest_centroid_assignment(values, k):
    k = min(k, len(values))
    cs = kmeans_1d(values, k)
    x = np.asarray(values, dtype=float)
    d = (x[:, None] - cs.centroids[None, :]) ** 2
    assert np.all(d[np.arange(x.size), cs.assignment] <= d.min(axis=1))
    assert np.all(np.diff(cs.centroids) > 0)


def test_all_levels_match_single_calls():
    x = np.random.default_rng(3).normal(size=40)
    levels = summarize_all_levels(x, 12)
    for k, out in levels.items():
        assert np.array_equal(out, summarize_values(x, k))
        assert np.unique(out).size == k


# transfers -------------------------------------------------------------

def test_transfer_worked_example():
    p = SummarizationPolicy({"a": 5, "b": 5})
    q = transfer_centroids(p, ("a", "b"), amount=2, gainer=0)
    assert (q["a"], q["b"]) == (7, 3)


def test_transfer_rejected_at_bound():
    p = SummarizationPolicy({"a": 10, "b": 10})
    assert transfer_centroids(p, ("a", "b"), 1, 0, k_min=1, k_max=10) is p


def test_transfer_errors():
    p = SummarizationPolicy({"a": 4, "b": 6})
    with pytest.raises(InvalidParameter):
        transfer_centroids(p, ("a", "b"), amount=0)
    with pytest.raises(InvalidParameter):
        transfer_centroids(p, ("a", "zz"))
    with pytest.raises(InvalidParameter):
        transfer_centroids(p, ("a", "a"))


@given(st.lists(st.integers(1, 10), min_size=2, max_size=10), st.integers(1, 4), st.integers(0, 1))
def test_transfer_conserves_total(ks, amount, gainer):
    p = SummarizationPolicy({i: k for i, k in enumerate(ks)})
    q = transfer_centroids(p, (0, 1), amount, gainer)
    assert sum(q.levels.values()) == sum(ks)
    assert all(1 <= v <= 10 for v in q.levels.values())


# dispersion ------------------------------------------------------------

def test_zero_target_is_a_no_op():
    p = SummarizationPolicy.uniform(range(20), 10)
    q, std = disperse_levels(p, 0.0, seed=1)
    assert q.levels == p.levels and std == 0.0


def _reachable(start, lo, hi):
    """All states of a two-supplier chain under unit transfers, by search."""
    seen, todo = {start}, [start]
    while todo:
        a, b = todo.pop()
        for nxt in ((a + 1, b - 1), (a - 1, b + 1)):
            if all(lo <= v <= hi for v in nxt) and nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


def test_two_suppliers_converge_to_the_extremes():
    start = (5, 6)
    target = float(np.std([1, 10], ddof=1))
    states = _reachable(start, 1, 10)
    hits = {s for s in states if np.std(s, ddof=1) >= target - 1e-12}
    assert hits == {(1, 10), (10, 1)}
    for seed in range(20):
        p = SummarizationPolicy({"a": start[0], "b": start[1]})
        q, std = disperse_levels(p, target, seed=seed, max_steps=10_000)
        assert (q["a"], q["b"]) in hits
        assert std == pytest.approx(target, rel=1e-15)


def test_all_at_upper_bound_cannot_move():
    p = SummarizationPolicy({"a": 10, "b": 10})
    q, std = disperse_levels(p, 100.0, seed=0, max_steps=50, k_min=1, k_max=10)
    assert q.levels == p.levels and std == 0.0


def test_dispersion_is_deterministic_and_conserves():
    p = SummarizationPolicy.uniform(range(200), 10, k_max=19)
    q1, s1 = disperse_levels(p, 2.0, seed=9, k_min=1, k_max=19)
    q2, s2 = disperse_levels(p, 2.0, seed=9, k_min=1, k_max=19)
    assert q1.levels == q2.levels and s1 == s2
    assert sum(q1.levels.values()) == 2000
    assert s1 >= 2.0 and s1 == pytest.approx(q1.std(), rel=1e-12)
    assert min(q1.levels.values()) >= 1 and max(q1.levels.values()) <= 19

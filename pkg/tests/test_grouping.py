import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iotpga.core import SummarizationPolicy
from iotpga.errors import InvalidParameter
from iotpga.grouping import (
    GroupingStrategy,
    SizeDistribution,
    balanced_sizes,
    equal_partition,
    partition,
    sample_sizes,
    singletons,
)

kinds = st.sampled_from(["fixed", "uniform", "powerlaw", "step"])


def test_fixed_sizes_truncate_the_last_draw():
    assert sample_sizes(SizeDistribution("fixed", 3), 10, seed=0) == [3, 3, 3, 1]
    assert sample_sizes(SizeDistribution("fixed", 2), 10, seed=0) == [2] * 5


def test_bad_parameters():
    with pytest.raises(InvalidParameter):
        sample_sizes(SizeDistribution("fixed", 3), 1)
    with pytest.raises(InvalidParameter):
        SizeDistribution("fixed", 1)
    with pytest.raises(InvalidParameter):
        SizeDistribution("powerlaw", 5, gamma=0)
    with pytest.raises(InvalidParameter):
        SizeDistribution("zipf", 5)


@given(kinds, st.integers(2, 30), st.integers(2, 500), st.integers(0, 2**32 - 1))
def test_sizes_sum_and_support(kind, N, n, seed):
    dist = SizeDistribution(kind, N)
    sizes = sample_sizes(dist, n, seed)
    assert sum(sizes) == n
    support = set(dist.support().tolist())
    assert all(s in support for s in sizes[:-1])
    assert 1 <= sizes[-1] <= N
    assert sizes == sample_sizes(dist, n, seed)


def test_uniform_frequencies_are_flat():
    N = 6
    draws = SizeDistribution("uniform", N).draw(np.random.default_rng(0), 20_000)
    counts = np.bincount(draws, minlength=N + 1)[2:]
    p = 1 / (N - 1)
    se = np.sqrt(draws.size * p * (1 - p))
    assert np.all(np.abs(counts - draws.size * p) <= 3 * se)


def test_step_concentrates_on_two_and_N():
    sizes = []
    for seed in range(200):
        sizes += sample_sizes(SizeDistribution("step", 20), 1000, seed)
    hist = np.bincount(sizes, minlength=21)
    top = set(np.argsort(hist)[-2:].tolist())
    assert top == {2, 20}
    assert hist[3:20].sum() < 0.05 * hist.sum()


def test_powerlaw_pmf():
    pmf = SizeDistribution("powerlaw", 4, gamma=2.0).pmf()
    w = np.array([1 / 4, 1 / 9, 1 / 16])
    assert np.allclose(pmf, w / w.sum())


def test_summarization_proximity_example():
    pol = SummarizationPolicy({"a": 1, "b": 9, "c": 2, "d": 8})
    part = partition(["a", "b", "c", "d"], [2, 2], "summarization_proximity", policies=pol)
    assert [set(g.members) for g in part.groups] == [{"a", "c"}, {"b", "d"}]


def test_data_proximity_example():
    data = {"a": [5.0], "b": [100.0], "c": [6.0], "d": [99.0]}
    part = partition(list(data), [2, 2], "data_proximity", epoch_data=data)
    assert [set(g.members) for g in part.groups] == [{"a", "c"}, {"b", "d"}]


def test_random_is_deterministic():
    ids = list(range(30))
    a = partition(ids, [5] * 6, "random", seed=11)
    b = partition(ids, [5] * 6, "random", seed=11)
    assert a == b


def test_summarization_proximity_ignores_epoch_data():
    pol = SummarizationPolicy({i: 1 + i % 7 for i in range(12)})
    parts = {partition(list(range(12)), [3] * 4, "summarization_proximity", policies=pol,
                       epoch_data={i: [float(e * i % 5)] for i in range(12)}).groups for e in range(5)}
    assert len(parts) == 1


def test_partition_checks():
    with pytest.raises(InvalidParameter):
        partition(["a", "b"], [3])
    with pytest.raises(InvalidParameter):
        partition(["a", "a"], [2])
    with pytest.raises(InvalidParameter):
        GroupingStrategy.parse("nearest")
    with pytest.raises(InvalidParameter):
        partition(["a", "b"], [1, 1], "data_proximity")


def test_equal_partition_examples():
    ids = list(range(10))
    assert sorted(equal_partition(ids, 3, seed=0).sizes) == [3, 3, 4]
    assert equal_partition(ids, 10, seed=0).sizes == [1] * 10
    assert equal_partition(ids, 1, seed=0).sizes == [10]
    with pytest.raises(InvalidParameter):
        equal_partition(ids, 11)
    assert singletons(ids).m == 10


@given(st.integers(1, 200), st.integers(1, 200), st.sampled_from(list(GroupingStrategy)), st.integers(0, 999))
def test_partition_validity(n, m, strategy, seed):
    m = min(m, n)
    ids = [f"s{i}" for i in range(n)]
    data = {s: [float((i * 37) % 11)] for i, s in enumerate(ids)}
    pol = SummarizationPolicy({s: 1 + i % 10 for i, s in enumerate(ids)})
    part = equal_partition(ids, m, strategy, epoch_data=data, policies=pol, seed=seed)
    assert part.covers(ids)
    assert sum(part.sizes) == n and max(part.sizes) - min(part.sizes) <= 1
    assert balanced_sizes(n, m) == sorted(part.sizes, reverse=True)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mimotopo.stats import downsample_cdf, empirical_cdf, likely_95, lower_quantile_rank


def test_single_sample():
    v, p = empirical_cdf([2.0])
    assert v.tolist() == [2.0] and p.tolist() == [1.0]


def test_four_samples():
    v, p = empirical_cdf([3, 1, 4, 2])
    assert v.tolist() == [1, 2, 3, 4]
    assert p.tolist() == [0.25, 0.5, 0.75, 1.0]


def test_empty():
    with pytest.raises(ValueError):
        empirical_cdf([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200), st.randoms())
def test_cdf_permutation_invariant(xs, random):
    shuffled = list(xs)
    random.shuffle(shuffled)
    a, pa = empirical_cdf(xs)
    b, pb = empirical_cdf(shuffled)
    assert np.array_equal(a, b) and np.array_equal(pa, pb)
    assert np.all(np.diff(pa) > 0) and pa[-1] == 1.0


def test_likely_95_one_to_hundred():
    assert likely_95(np.arange(1, 101)) == 5


def test_likely_95_constant():
    assert likely_95(np.full(37, 2.5)) == 2.5


def test_likely_95_too_few():
    with pytest.raises(ValueError):
        likely_95(np.ones(19))


@pytest.mark.parametrize("n, rank", [(20, 1), (21, 2), (100, 5), (101, 6), (40_000, 2000), (10_000, 500)])
def test_rank(n, rank):
    assert lower_quantile_rank(n, 5) == rank


@given(st.lists(st.floats(0, 50), min_size=20, max_size=500))
def test_likely_95_on_cdf(xs):
    v, p = empirical_cdf(xs)
    # first CDF step reaching 0.05
    i = np.searchsorted(p, 0.05 - 1e-15)
    assert likely_95(xs) == v[i]


def test_downsample():
    v, p = empirical_cdf(np.arange(10_000, dtype=float))
    dv, dp = downsample_cdf(v, p, 2000)
    assert len(dv) == 2000
    assert dp[-1] == 1.0 and dv[-1] == 9999.0
    assert np.allclose(np.diff(dp), 1 / 2000)
    v2, p2 = empirical_cdf(np.arange(50.0))
    assert downsample_cdf(v2, p2, 2000)[0] is v2

import math

import numpy as np
import pytest

from blockbloom.analytics import (
    capacity_for_fpr,
    fpr_estimate,
    min_fpr,
    optimal_k,
    optimal_n,
    sizing,
)

LN2 = math.log(2)


def _eq1(m, n, k):
    # independent form of the classical estimate
    return (1 - math.exp(-k * n / m)) ** k


def test_fpr_estimate_c10_k7():
    assert fpr_estimate(10_000, 1_000, 7) == pytest.approx(_eq1(10, 1, 7), rel=1e-12)
    assert fpr_estimate(10_000, 1_000, 7) == pytest.approx(8.19e-3, rel=1e-3)


def test_fpr_estimate_at_optimal_load_is_power_of_half():
    m, k = 2**25, 16
    assert fpr_estimate(m, m * LN2 / k, k) == pytest.approx(0.5**16, rel=1e-12)
    assert 0.5**16 == pytest.approx(1.526e-5, rel=1e-3)


def test_fpr_estimate_small_load_first_order():
    assert fpr_estimate(10**9, 10, 1) == pytest.approx(10 / 10**9, rel=1e-6)


@pytest.mark.parametrize("m,n,k", [(0, 1, 1), (10, 0, 1), (10, 1, 0)])
def test_fpr_estimate_domain(m, n, k):
    with pytest.raises(ValueError):
        fpr_estimate(m, n, k)


def test_optimal_k_examples():
    real, k = optimal_k(10)
    assert real == pytest.approx(6.931, abs=1e-3)
    assert k == 7
    assert _eq1(10, 1, 7) < _eq1(10, 1, 6)
    assert optimal_k(1 / LN2)[0] == pytest.approx(1.0, rel=1e-12)
    assert optimal_k(1 / LN2)[1] == 1
    assert optimal_k(23.083)[0] == pytest.approx(16.0, abs=1e-3)


def test_optimal_k_minimizes_on_integer_neighbours():
    for c in np.linspace(1, 40, 400):
        k = optimal_k(c)[1]
        for other in (k - 1, k + 1):
            if other >= 1:
                assert _eq1(c, 1, k) <= _eq1(c, 1, other)


def test_min_fpr():
    assert min_fpr(10) == pytest.approx(8.19e-3, rel=1e-3)
    assert min_fpr(23.083) == pytest.approx(0.5**16, rel=1e-4)
    values = [min_fpr(c) for c in np.linspace(0.5, 60, 100)]
    assert all(a > b for a, b in zip(values, values[1:]))
    with pytest.raises(ValueError):
        min_fpr(0)


def test_min_fpr_equals_eq1_at_optimum():
    for c in (3.0, 10.0, 17.5, 23.083):
        assert _eq1(c, 1, c * LN2) == pytest.approx(min_fpr(c), rel=1e-9)


def test_optimal_n():
    assert abs(optimal_n(2**25, 16) - 1_453_635) <= 1
    assert optimal_n(100, 100) == 1
    with pytest.raises(ValueError):
        optimal_n(0, 1)


def test_capacity_for_fpr():
    n, k = capacity_for_fpr(10**6, 0.01)
    c = -math.log(0.01) / LN2**2
    assert c == pytest.approx(9.585, abs=1e-3)
    assert k == 7
    assert n == math.floor(10**6 / c)
    n, k = capacity_for_fpr(10**6, 0.5)
    assert k == 1
    assert 10**6 / n == pytest.approx(1.443, abs=1e-3)


@pytest.mark.parametrize("f", [1e-9, 1e-4, 0.01, 0.3, 0.5, 0.9])
def test_capacity_round_trip(f):
    c = -math.log(f) / LN2**2
    assert min_fpr(c) == pytest.approx(f, rel=1e-12)


@pytest.mark.parametrize("f", [0, 1, -0.1, 1.5])
def test_capacity_domain(f):
    with pytest.raises(ValueError):
        capacity_for_fpr(1000, f)


def test_monotonic_in_n_and_m():
    ns = np.linspace(1, 10_000, 50)
    assert all(np.diff([fpr_estimate(10**5, n, 7) for n in ns]) > 0)
    ms = np.linspace(10**4, 10**6, 50)
    assert all(np.diff([fpr_estimate(m, 1000, 7) for m in ms]) < 0)


def test_sizing():
    r = sizing(2**25, 16)
    assert r.n_opt == optimal_n(2**25, 16)
    assert r.c == pytest.approx(2**25 / r.n_opt)
    assert r.k_opt == 16
    assert r.f_predicted == pytest.approx(0.5**16, rel=1e-5)

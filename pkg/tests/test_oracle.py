import random

import numpy as np
import pytest

from blockbloom.analytics import fpr_estimate, optimal_n
from blockbloom.bench import generate_unique_keys, measure_fpr
from blockbloom.config import FilterConfig
from blockbloom.core import BloomFilter
from blockbloom.oracle import oracle_add, oracle_bits, oracle_contains, oracle_fpr
from blockbloom.selftest import random_config, run_selftest


def test_oracle_bits_unique_positions():
    cfg = FilterConfig("CSBF", m=1 << 14, B=512, S=64, k=16, z=4)
    f = BloomFilter(cfg)
    bits = oracle_bits(f, 5)
    assert len(bits) == len(set(bits)) <= 16
    assert all(0 <= w < cfg.word_count and 0 <= b < 64 for w, b in bits)


def test_oracle_equivalence_random_configs():
    r = random.Random(21)
    for _ in range(12):
        cfg = random_config(r)
        keys = generate_unique_keys(1500, seed=r.randrange(1 << 32))
        fast, slow = BloomFilter(cfg), BloomFilter(cfg)
        fast.bulk_add(keys)
        for k in keys.tolist():
            oracle_add(slow, k)
        np.testing.assert_array_equal(fast.words, slow.words)
        probes = generate_unique_keys(1500, seed=3, stream=1)
        assert fast.bulk_contains(probes).tolist() == [oracle_contains(slow, k) for k in probes.tolist()]


@pytest.mark.parametrize(
    "cfg",
    [
        FilterConfig("CBF", m=1 << 14, k=8),
        FilterConfig("SBF", m=1 << 14, B=256, S=64, k=8),
        FilterConfig("CSBF", m=1 << 14, B=512, S=64, k=8, z=2),
    ],
    ids=lambda c: c.variant.name,
)
def test_oracle_fpr_matches_bulk_measurement(cfg):
    # same keys and protocol, so the counts must match exactly
    n = optimal_n(cfg.m_effective, cfg.k)
    slow = oracle_fpr(cfg, n, 20_000, seed=2)
    fast = measure_fpr(cfg, 20_000, seed=2)
    assert slow == fast.fpr
    assert fast.inserted == n


def test_oracle_fpr_empty_filter():
    cfg = FilterConfig("SBF", m=1 << 12, B=256, S=64, k=8)
    assert oracle_fpr(cfg, 0, 1000) == 0.0


def test_cbf_fpr_near_classical_small_scale():
    cfg = FilterConfig("CBF", m=1 << 15, k=6)
    n = optimal_n(cfg.m, cfg.k)
    res = measure_fpr(cfg, 400_000, seed=1)
    want = fpr_estimate(cfg.m, n, cfg.k)
    assert abs(res.fpr - want) < 5 * np.sqrt(want / res.queries) + 0.05 * want


def test_selftest_passes():
    assert run_selftest(n_configs=8, n_keys=800, seed=3) == []

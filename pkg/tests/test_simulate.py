import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from minplustree.distribution import TruncationPolicy, evolve
from minplustree.simulate import (
    EmpiricalSummary,
    SimConfig,
    compare_to_exact,
    run,
    sample_one,
)

from enum_oracle import enumerate_pmf


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_sample_one_depth1():
    rng = _rng()
    assert all(sample_one(1, 0.5, rng) == 1 for _ in range(10))


def test_sample_one_forced_plus():
    rng = _rng()
    assert all(sample_one(2, 1.0, rng) == 2 for _ in range(10))
    assert all(sample_one(5, 1.0, rng) == 16 for _ in range(5))


def test_sample_one_pure_min():
    rng = _rng()
    assert all(sample_one(6, 0.0, rng) == 1 for _ in range(5))


def test_sample_one_depth3_frequencies():
    # enumeration gives (3, 2, 2, 1)/8; 3 sigma binomial tolerance at n = 20000
    oracle = enumerate_pmf(3, Fraction(1, 2))
    n = 20_000
    rng = _rng(5)
    counts = Counter(sample_one(3, 0.5, rng) for _ in range(n))
    for k, w in oracle.items():
        p = float(w)
        tol = 3 * math.sqrt(p * (1 - p) / n)
        assert abs(counts[k] / n - p) < tol


def test_sample_one_range_invariant():
    rng = _rng(9)
    for depth in (1, 2, 4, 7):
        for p in (0.1, 0.5, 0.9):
            for _ in range(50):
                v = sample_one(depth, p, rng)
                assert 1 <= v <= 2 ** (depth - 1)


def test_run_reproducible():
    cfg = SimConfig(depth=8, p_plus=0.5, n_samples=30_000, seed=77, workers=4)
    first = run(cfg)
    second = run(cfg)
    assert first == second
    assert sum(first.counts.values()) == cfg.n_samples
    assert min(first.counts) >= 1


def test_run_depth2_concentration():
    n = 100_000
    summary = run(SimConfig(depth=2, p_plus=0.5, n_samples=n, seed=13))
    emp = summary.counts.get(2, 0) / n
    assert abs(emp - 0.5) < 3 * math.sqrt(0.25 / n)


def test_run_all_plus_mean():
    summary = run(SimConfig(depth=7, p_plus=1.0, n_samples=2_000, seed=3, workers=2))
    assert summary.counts == {64: 2_000}


def test_scaled_quantiles_ordering():
    summary = run(SimConfig(depth=9, p_plus=0.5, n_samples=50_000, seed=21, workers=2))
    qs = [summary.scaled_quantiles[q] for q in sorted(summary.scaled_quantiles)]
    assert qs == sorted(qs)
    assert all(v >= 0.0 for v in qs)


def test_compare_exact_to_itself_is_zero():
    # a degenerate sample with counts exactly proportional to the pmf
    exact = evolve(3, 0.5, TruncationPolicy(k_max=4))
    summary = EmpiricalSummary(
        counts={1: 3, 2: 2, 3: 2, 4: 1},
        n=8,
        mean_log=0.0,
        scaled_quantiles={},
        depth=3,
        p_plus=0.5,
    )
    rep = compare_to_exact(summary, exact)
    assert rep.max_abs_cdf_gap == 0.0
    assert rep.chi2_stat == 0.0


def test_compare_depth3_large_sample():
    # DKW-style tolerance at one million samples
    exact = evolve(3, 0.5, TruncationPolicy(k_max=4))
    summary = run(SimConfig(depth=3, p_plus=0.5, n_samples=1_000_000, seed=99, workers=2))
    rep = compare_to_exact(summary, exact)
    assert rep.max_abs_cdf_gap < 0.005


def test_compare_rejects_mismatched_depth():
    exact = evolve(4, 0.5, TruncationPolicy(k_max=8))
    summary = run(SimConfig(depth=3, p_plus=0.5, n_samples=100, seed=1))
    with pytest.raises(ValueError):
        compare_to_exact(summary, exact)


def test_compare_rejects_mismatched_p():
    exact = evolve(3, 0.4, TruncationPolicy(k_max=4))
    summary = run(SimConfig(depth=3, p_plus=0.5, n_samples=100, seed=1))
    with pytest.raises(ValueError):
        compare_to_exact(summary, exact)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(depth=0, p_plus=0.5, n_samples=1, seed=0)
    with pytest.raises(ValueError):
        SimConfig(depth=64, p_plus=0.5, n_samples=1, seed=0)
    with pytest.raises(ValueError):
        SimConfig(depth=2, p_plus=1.5, n_samples=1, seed=0)
    with pytest.raises(ValueError):
        SimConfig(depth=2, p_plus=0.5, n_samples=0, seed=0)

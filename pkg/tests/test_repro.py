import math

import numpy as np
import pytest

from auctioncomp.repro import (
    CLAIMS,
    appendix_b_revenue,
    bign_tightness,
    er_benchmark_decomposition,
    er_offregion_items,
    er_order_stat,
    little_n_tightness,
    run_all,
    run_claim,
    two_item_sum_tail,
    two_item_sum_tail_mc,
)


def test_er_order_stat_identity():
    # E[x-th highest of y] = y/(x-1)
    est = er_order_stat(4, 12, 300_000, seed=31, p=1e6)
    assert abs(est.mean - 4.0) <= 3 * est.stderr


def test_er_order_stat_minimum():
    # x=y is the minimum; mean y/(y-1)
    est = er_order_stat(12, 12, 300_000, seed=32, p=1e6)
    assert abs(est.mean - 12.0 / 11.0) <= 3 * est.stderr


def test_er_order_stat_heavy_tail_flagged():
    with pytest.raises(ValueError):
        er_order_stat(1, 5, 1000, seed=0)
    with pytest.raises(ValueError):
        er_order_stat(2, 5, 1000, seed=0, p=1e9)  # infinite variance regime
    est = er_order_stat(2, 5, 300_000, seed=33, p=1e4)
    assert abs(est.mean - 5.0) <= 4 * est.stderr  # wide CI but consistent


def test_benchmark_decomposition_gap_shrinks_with_p():
    # the benchmark's atom contribution gets rarer and larger as p grows, so
    # N scales with p to keep the gap estimate's noise below the trend
    gaps = []
    for p, N in [(1e2, 400_000), (1e3, 2_000_000), (1e4, 10_000_000)]:
        _, _, gap = er_benchmark_decomposition(4, 2, N, seed=34, p=p)
        gaps.append(gap)
    assert gaps[1] <= gaps[0] + 0.02 and gaps[2] <= gaps[1] + 0.02
    assert gaps[0] > gaps[-1]
    assert gaps[-1] <= 0.05


def test_decomposition_single_item_degenerates():
    bench, approx, _ = er_benchmark_decomposition(3, 1, 100_000, seed=35, p=1e4)
    # off-region term vanishes with one item; benchmark is the n*1 structure
    assert approx.mean == pytest.approx(3.0)
    assert abs(bench.mean - 3.0) <= 3 * bench.stderr + 0.05


def test_offregion_items_positive_and_symmetric():
    ests = er_offregion_items(16, 4, 100_000, seed=36, p=1e5)
    means = [e.mean for e in ests]
    assert all(m > 0 for m in means)
    # i.i.d. items: per-item terms agree within joint noise
    for a, b in zip(ests, ests[1:]):
        assert abs(a.mean - b.mean) <= 4 * a.combined_stderr(b)


def test_bign_tightness_pass_and_fail_branches():
    ok = bign_tightness(16, 4, 8, 100_000, seed=37)
    assert ok.passed
    assert ok.details["implied_min_c"] > 0
    low_c = bign_tightness(16, 4, 0, 100_000, seed=37)
    assert not low_c.passed  # m*(n+0) < benchmark: direction check exercised


def test_two_item_sum_tail_closed_form():
    with pytest.raises(ValueError):
        two_item_sum_tail(1.0)
    for q in (1.5, 5.0, 20.0, 100.0):
        mc, se = two_item_sum_tail_mc(q, 400_000, seed=38)
        assert abs(two_item_sum_tail(q) - mc) <= 4 * se + 1e-5


def test_two_item_sum_tail_near_one():
    # q -> 1+ pushes the probability toward 1
    mc, se = two_item_sum_tail_mc(1.01, 200_000, seed=39)
    assert abs(two_item_sum_tail(1.01) - mc) <= 4 * se + 1e-5
    assert two_item_sum_tail(1.01) > 0.95


def test_two_item_sum_tail_exceeds_downstream_structure():
    q = 100.0
    assert two_item_sum_tail(q) >= 1.0 / q + math.log(q) / (4.0 * q**2)


def test_appendix_b_identity():
    res = appendix_b_revenue(10_000, 50_000, seed=40)
    assert res.passed
    assert "surplus_over_2n" in res.details
    with pytest.raises(ValueError):
        appendix_b_revenue(100, 1000, seed=0)


def test_little_n_tightness_monotone_in_m():
    implied = []
    for m in (32, 64, 128):
        res = little_n_tightness(2, m, 20_000, seed=41)
        assert res.passed  # revenue respects the n*price cap
        implied.append(res.details["implied_min_c"])
    assert implied[0] <= implied[1] <= implied[2]
    assert implied[-1] > implied[0]


def test_claim_registry_runs_and_is_deterministic():
    res1 = run_claim("er-order-stat-4-12", seed=42)
    res2 = run_claim("er-order-stat-4-12", seed=42)
    assert res1.computed == res2.computed
    with pytest.raises(KeyError):
        run_claim("no-such-claim", seed=0)


def test_run_all_covers_registry():
    results = run_all(seed=43)
    assert len(results) == len(CLAIMS)
    assert all(np.isfinite(r.computed) for r in results)

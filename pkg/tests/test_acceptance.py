"""Acceptance suite: one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed at the end of the session.
"""

import math
import time

import numpy as np
import pytest

from flexauc.auction import run_auction
from flexauc.harness import EXPERIMENTS, ExperimentConfig, run_records, summarize, to_csv
from flexauc.oracle import (
    PropertyViolation,
    check_bid_monotonicity,
    check_pricing,
    check_truthfulness,
    check_welfare,
    close_le,
    dominance_check,
    indicator_check,
    ir_violations,
    tight_indicator_instance,
    trial_rng,
)
from flexauc.strategy import E2, Estimates, channel_width, estimated_bid_vector, true_bid_vector

TOL = 1e-9
SEED = 0


def random_instance(rng, max_n=12, max_c=12):
    n, c = int(rng.integers(2, max_n + 1)), int(rng.integers(1, max_c + 1))
    return -np.sort(-rng.uniform(0.0, 10.0, size=(n, c)), axis=1), c


@pytest.fixture(scope="module")
def truthfulness_run():
    t0 = time.perf_counter()
    res = check_truthfulness(100, 100, SEED, C=5)
    return res, time.perf_counter() - t0


@pytest.mark.parametrize("mechanism", ["vcg", "uniform", "partial_uniform"])
def test_c01_truthfulness(truthfulness_run, mechanism):
    """C1 truthfulness: no deviant utility above truthful (100 x 100, C=5)"""
    res, _ = truthfulness_run
    counts = res.stats["counts"][mechanism]
    assert sum(counts.values()) == 100 * 100
    assert counts["greater"] == 0, f"{mechanism}: {counts}; first counterexamples: " + repr(
        [c for c in res.counterexamples if c["mechanism"] == mechanism][:1])


def test_c01_truthfulness_runtime(truthfulness_run):
    """C1 truthfulness: runtime under 60 s"""
    _, elapsed = truthfulness_run
    assert elapsed < 60


def test_c02_individual_rationality():
    """C2 individual rationality across every experiment and random instances"""
    total = 0
    for name in EXPERIMENTS:
        kw = {"trials": 20}
        if name == "truthfulness":
            kw["perturbations"] = 20
        s = summarize(run_records(ExperimentConfig(name, seed=SEED, **kw)))
        total += s["totals"].get("ir_violations", 0)
    for t in range(2000):
        bids, c = random_instance(trial_rng(SEED, 20, t))
        for m in ("vcg", "uniform", "partial_uniform"):
            if m == "uniform" and not c < bids.shape[0]:
                continue
            total += len(ir_violations(bids, run_auction(bids, c, m)))
    assert total == 0


def test_c03_welfare_maximization():
    """C3 welfare equals brute force on 1000 instances (N<=5, C<=6) in under 10 s"""
    t0 = time.perf_counter()
    res = check_welfare(1000, SEED, max_n=5, max_c=6)
    elapsed = time.perf_counter() - t0
    assert res.passed, res.counterexamples[:1]
    assert elapsed < 10


def test_c04_payment_dominance():
    """C4 partial-uniform revenue dominates VCG and uniform"""
    bad = 0
    for t in range(10_000):
        bids, c = random_instance(trial_rng(SEED, 40, t))
        try:
            dominance_check(bids, c)
        except PropertyViolation:
            bad += 1
    assert bad == 0
    recs = run_records(ExperimentConfig("payment-comparison", trials=100, seed=SEED))
    for r in recs:
        m = r.metrics
        assert m["partial_ratio"] >= 1 - TOL
        if m["uniform_revenue"] is not None:
            assert close_le(m["uniform_revenue"], m["partial_revenue"])
    high_c = [r.metrics["partial_ratio"] for r in recs if r.params["C"] in (20, 30)]
    assert len(high_c) == 200 and min(high_c) >= 1 - TOL


def test_c05_indicator_bound():
    """C5 revenue at most C x b(C+1) for all rules, with a tight family"""
    for t in range(10_000):
        bids, c = random_instance(trial_rng(SEED, 50, t))
        indicator_check(bids, c)
    for C in range(2, 31):
        for m, (rev, ind) in indicator_check(tight_indicator_instance(C), C).items():
            assert rev == ind, (C, m)


def test_c06_bid_monotonicity():
    """C6 true bids non-increasing; closed form equals marginal difference when scarce"""
    assert check_bid_monotonicity(10_000, SEED).passed
    checked = 0
    for t in range(10_000):
        rng = trial_rng(SEED, 60, t)
        alpha = rng.uniform(0.05, 2.0)
        G = 10 ** rng.uniform(7, 11)
        B0 = 50e6
        b0 = float(rng.choice([0.0, 0.1e6, 0.5e6, 1e6]))
        C = int(rng.integers(1, 65))
        if not (B0 + b0) / C - b0 > 0:
            continue
        B = channel_width(B0, b0, C)
        true = true_bid_vector(alpha, G, B, C)
        est = estimated_bid_vector(Estimates(alpha, G), B0, b0, C)
        for k in range(1, C + 1):
            if k * B <= G * E2:
                assert math.isclose(est[k - 1], true[k - 1], rel_tol=TOL, abs_tol=TOL * alpha * G * E2)
                checked += 1
    assert checked > 10_000


def test_c07_pricing_optimality():
    """C7 optimal price is the grid argmax in 100/100 instances"""
    res = check_pricing(100, SEED)
    assert res.passed, res.counterexamples[:1]


def test_c08_onebid_comparison():
    """C8 FlexAuc welfare at least OneBid for C in 1..9, gap non-decreasing on average"""
    recs = run_records(ExperimentConfig("onebid-comparison", trials=100, seed=SEED))
    assert all(r.metrics["welfare_gap"] >= -TOL for r in recs)
    gaps = [g["welfare_gap_mean"] for g in summarize(recs)["groups"]]
    assert len(gaps) == 9
    assert all(b >= a - TOL * max(1.0, abs(a)) for a, b in zip(gaps, gaps[1:])), gaps


@pytest.fixture(scope="module")
def guard_band_sweep():
    cfg = ExperimentConfig("guard-band-sweep", trials=100, seed=SEED, guard_bands_mhz=(0.0, 0.1, 0.5, 1.0))
    return run_records(cfg)


def test_c09_indicator_nondecreasing_without_guard_band(guard_band_sweep):
    """C9 b0=0: indicator non-decreasing in C (trial averages)"""
    zero = [r for r in guard_band_sweep if r.params["b0_mhz"] == 0.0]
    means = [g["indicator_est_mean"] for g in summarize(zero)["groups"]]
    drops = [(c + 1, b / a - 1) for c, (a, b) in enumerate(zip(means, means[1:]), start=1)
             if b < a * (1 - TOL)]
    assert not drops, f"{len(drops)} decreasing steps; first few (C, relative change): {drops[:5]}"


def test_c09_guard_band_optimum_and_dominance(guard_band_sweep):
    """C9 b0>0: finite optimum exists and the indicator bounds realized revenue"""
    for r in guard_band_sweep:
        if r.params["b0_mhz"] == 0.0:
            continue
        m = r.metrics
        assert 1 <= m["best_C"] <= 64
        assert close_le(m["vcg_revenue"], m["indicator"])
        assert close_le(m["partial_revenue"], m["indicator"])
    for b0 in (0.1, 0.5, 1.0):
        rows = [r for r in guard_band_sweep if r.params["b0_mhz"] == b0]
        best = {r.trial: r.metrics["best_C"] for r in rows}
        peak = {}
        for r in rows:
            peak[r.trial] = max(peak.get(r.trial, 0.0), r.metrics["indicator_est"])
        assert all(p > 0 and math.isfinite(p) for p in peak.values())
        assert len(best) == 100


def test_c09_wider_guard_band_never_helps(guard_band_sweep):
    """C9 wider b0 never increases the indicator at fixed C"""
    table = {(r.trial, r.params["C"], r.params["b0_mhz"]): r.metrics["indicator_est"] for r in guard_band_sweep}
    bad = checked = 0
    for trial in range(100):
        for C in range(1, 65):
            # a guard band is only swept up to its own channel limit
            vals = [table[key] for b in (0.0, 0.1, 0.5, 1.0) if (key := (trial, C, b)) in table]
            checked += len(vals) - 1
            bad += sum(b > a * (1 + TOL) for a, b in zip(vals, vals[1:]))
    assert checked > 100 * 64
    assert bad == 0


@pytest.mark.parametrize("name", EXPERIMENTS)
def test_c10_determinism(name):
    """C10 byte-identical CSV across reruns and worker counts"""
    kw = {"trials": 6, "seed": 7}
    if name == "truthfulness":
        kw["perturbations"] = 10
    if name in ("channelization-sweep", "guard-band-sweep"):
        kw["c_cap"] = 16
    cfg = ExperimentConfig(name, **kw)
    serial = to_csv(name, run_records(cfg, workers=1))
    assert serial == to_csv(name, run_records(cfg, workers=1))
    assert serial == to_csv(name, run_records(cfg, workers=3))

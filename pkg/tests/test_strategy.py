import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexauc.scenario import DomainError
from flexauc.strategy import (
    E2,
    Estimates,
    channel_width,
    estimated_bid,
    estimated_bid_vector,
    gross_curve,
    h,
    optimal_price,
    optimal_user_demand,
    true_bid_vector,
    user_utility,
    wsp_gross_revenue,
    wsp_revenue,
)


def test_user_demand_maximizes_approximate_utility():
    g, p, a = 1e12, 0.7, 0.3
    w = optimal_user_demand(g, p, a)
    assert w == pytest.approx(g * math.exp(-1 - p / a), rel=1e-12)
    best = user_utility(g, p, a, w)
    for f in (0.5, 0.9, 0.99, 1.01, 1.1, 2.0):
        assert user_utility(g, p, a, f * w) < best


def test_user_utility_at_zero_and_exact_form():
    assert user_utility(5.0, 1.0, 1.0, 0.0) == 0.0
    assert user_utility(math.e, 0.0, 1.0, 1.0) == pytest.approx(1.0)
    assert user_utility(math.e - 1, 0.0, 1.0, 1.0, exact=True) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        user_utility(1.0, 1.0, 1.0, -1.0)


def test_price_regimes():
    assert optimal_price(0.3, 100.0, 1, 20.0).regime == "abundant"
    assert optimal_price(0.3, 100.0, 1, 20.0).price_per_hz == 0.3
    d = optimal_price(1.0, math.e**4, 1, 1.0)
    assert d.regime == "scarce"
    assert d.price_per_hz == pytest.approx(3.0)
    with pytest.raises(DomainError):
        optimal_price(1.0, 1.0, 0, 1.0)


def test_price_continuous_at_threshold():
    G = 1e9
    B = G * E2
    lo = optimal_price(0.25, G, 1, B * (1 - 1e-12)).price_per_hz
    hi = optimal_price(0.25, G, 1, B * (1 + 1e-12)).price_per_hz
    assert lo == pytest.approx(hi, abs=1e-9)


@pytest.mark.parametrize("K,B", [(1, 1e6), (3, 5e6), (10, 5e6), (1, 1e9)])
def test_optimal_price_beats_grid(K, B):
    alpha, G = 0.3, 2e8
    p = optimal_price(alpha, G, K, B).price_per_hz
    best = wsp_revenue(alpha, G, K, B, p)
    for r in np.linspace(0.1, 3.0, 59):
        assert wsp_revenue(alpha, G, K, B, r * p) <= best * (1 + 1e-12)


def test_gross_revenue_matches_revenue_at_optimal_price():
    alpha, G, B = 0.35, 3e8, 4e6
    for K in range(1, 15):
        p = optimal_price(alpha, G, K, B).price_per_hz
        assert wsp_gross_revenue(alpha, G, K, B) == pytest.approx(wsp_revenue(alpha, G, K, B, p), rel=1e-12)
    assert wsp_gross_revenue(alpha, G, 0, B) == 0.0


def test_gross_curve_vectorized_matches_scalar():
    alpha, G, B = 0.2, 1e8, 2e6
    curve = gross_curve(alpha, G, B, 12)
    for k in range(13):
        assert curve[k] == pytest.approx(wsp_gross_revenue(alpha, G, k, B), rel=1e-13)


def test_true_bids_examples():
    assert np.allclose(true_bid_vector(1.0, math.e**2, 2.0, 2), [1.0, 0.0])
    assert np.allclose(true_bid_vector(1.0, math.e**4, 1.0, 2), [3.0, 3.0 - 2 * math.log(2)], rtol=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    alpha=st.floats(0.01, 5.0),
    logG=st.floats(3.0, 12.0),
    logB=st.floats(2.0, 9.0),
    C=st.integers(1, 64),
)
def test_true_bids_nonincreasing_and_nonnegative(alpha, logG, logB, C):
    v = true_bid_vector(alpha, 10**logG, 10**logB, C)
    assert v.shape == (C,)
    assert np.all(v >= 0)
    assert np.all(np.diff(v) <= 1e-9 * max(1.0, v[0]))


def test_h_values():
    assert h(1) == 1.0
    assert h(2) == pytest.approx(0.25)
    assert h(3) == pytest.approx(4 / 27)
    for k in range(2, 40):
        assert h(k) == pytest.approx((k - 1) ** (k - 1) / k**k, rel=1e-12)
    with pytest.raises(DomainError):
        h(0)


def test_channel_width():
    assert channel_width(50e6, 0, 5) == 10e6
    assert channel_width(50e6, 1e6, 5) == pytest.approx(9.2e6)
    assert channel_width(50.0, 1.0, 49) == pytest.approx(51 / 49 - 1)
    with pytest.raises(DomainError):
        channel_width(10.0, 5.0, 3)


def test_estimated_bid_example():
    assert estimated_bid(Estimates(1.0, 10 * math.e**3), 50.0, 0.0, 5, 1) == pytest.approx(20.0)


def test_estimated_bid_zero_once_previous_supply_is_abundant():
    est = Estimates(0.3, 1e8)
    B0, C = 50e6, 40
    v = estimated_bid_vector(est, B0, 0.0, C)
    B = channel_width(B0, 0.0, C)
    for k in range(1, C + 1):
        assert (v[k - 1] == 0) == ((k - 1) * B > est.gain_est_hz * E2)


def test_estimated_vector_matches_scalar():
    est = Estimates(0.27, 4e9)
    v = estimated_bid_vector(est, 50e6, 0.1e6, 30)
    for k in range(1, 31):
        assert v[k - 1] == pytest.approx(estimated_bid(est, 50e6, 0.1e6, 30, k), rel=1e-12, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(alpha=st.floats(0.05, 2.0), logG=st.floats(8.0, 11.0), C=st.integers(1, 64), b0=st.sampled_from([0, 1e5, 5e5]))
def test_closed_form_matches_marginal_difference_when_scarce(alpha, logG, C, b0):
    G, B0 = 10**logG, 50e6
    B = channel_width(B0, b0, C) if (B0 + b0) / C - b0 > 0 else None
    if B is None:
        return
    true = true_bid_vector(alpha, G, B, C)
    est = estimated_bid_vector(Estimates(alpha, G), B0, b0, C)
    for k in range(1, C + 1):
        if k * B <= G * E2:
            assert est[k - 1] == pytest.approx(true[k - 1], rel=1e-9, abs=1e-9 * alpha * G * E2)


def test_estimates_must_be_positive():
    with pytest.raises(DomainError):
        Estimates(0.0, 1.0)
    with pytest.raises(DomainError):
        Estimates(1.0, -1.0)

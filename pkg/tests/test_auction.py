import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexauc.auction import (
    Allocation,
    AuctionOutcome,
    BidMatrix,
    MechanismError,
    determine_winners,
    kth_highest,
    max_loser_bids,
    onebid_auction,
    partial_uniform_payments,
    read_outcome,
    revenue_indicator,
    run_auction,
    uniform_payments,
    uniform_price,
    vcg_payments,
    welfare_of,
    write_outcome,
)
from flexauc.oracle import brute_force_welfare
from flexauc.scenario import DomainError


def test_vcg_two_bidders(pair, backend):
    out = run_auction(pair, 2, "vcg")
    assert out.allocation.counts == (1, 1)
    assert out.payments == (1.0, 3.0)
    assert out.revenue == 4.0
    assert out.welfare == 9.0


def test_three_bidders_all_rules(triple, backend):
    alloc, top = determine_winners(triple, 2)
    assert alloc.counts == (1, 1, 0)
    assert list(top) == [5.0, 4.0]
    assert list(vcg_payments(triple, alloc)) == [2.0, 3.0, 0.0]
    assert uniform_price(triple, alloc) == 2.0
    assert list(uniform_payments(triple, alloc)) == [2.0, 2.0, 0.0]
    # highest bid each WSP leaves unallocated
    assert list(max_loser_bids(triple, alloc)) == [3.0, 1.0, 2.0]
    assert list(partial_uniform_payments(triple, alloc)) == [2.0, 3.0, 0.0]
    assert revenue_indicator(triple, 2) == 6.0
    assert kth_highest(triple, 3) == 3.0
    revs = tuple(run_auction(triple, 2, m).revenue for m in ("vcg", "uniform", "partial_uniform"))
    assert revs == (5.0, 4.0, 5.0)
    assert run_auction(triple, 2, "vcg").welfare == 9.0


def test_onebid_example(backend):
    out = onebid_auction([5.0, 4.0, 2.0], 2)
    assert out.allocation.counts == (1, 1, 0)
    assert out.payments == (2.0, 2.0, 0.0)
    assert out.welfare == 9.0
    assert out.revenue == 4.0


def test_onebid_more_channels_than_bidders(backend):
    out = onebid_auction([5.0, 4.0], 4)
    assert out.allocation.counts == (1, 1)
    assert out.allocation.total == 2
    assert out.revenue == 0.0


def test_onebid_via_run_auction_uses_first_bids(triple):
    assert run_auction(triple, 2, "onebid") == onebid_auction(triple[:, 0], 2)


def test_ties_go_to_lower_index(backend):
    bids = np.array([[2.0, 2.0], [2.0, 2.0], [2.0, 0.0]])
    alloc, _ = determine_winners(bids, 2)
    assert alloc.counts == (2, 0, 0)


def test_uniform_requires_more_bidders_than_channels(pair):
    alloc, _ = determine_winners(pair, 2)
    with pytest.raises(MechanismError):
        uniform_price(pair, alloc)
    with pytest.raises(MechanismError):
        run_auction(pair, 2, "uniform")


def test_vcg_needs_two_bidders():
    with pytest.raises(MechanismError):
        run_auction([[3.0, 1.0]], 2, "vcg")


def test_unknown_mechanism(pair):
    with pytest.raises(MechanismError):
        run_auction(pair, 2, "dutch")
    assert run_auction(pair, 2, "partial-uniform").mechanism == "partial_uniform"


@pytest.mark.parametrize(
    "bad",
    [[[1.0, 2.0], [3.0, 1.0]], [[-1.0, -2.0], [1.0, 0.0]], [[np.nan, 0.0], [1.0, 0.0]], [[]]],
)
def test_bid_matrix_validation(bad):
    with pytest.raises(DomainError):
        BidMatrix(bad)


def test_bid_matrix_tolerates_rounding_rise():
    BidMatrix([[1.0, 1.0 + 1e-12], [1.0, 0.0]])


def test_bid_matrix_is_read_only(pair):
    m = BidMatrix(pair)
    with pytest.raises(ValueError):
        m.values[0, 0] = 9


def test_c_mismatch(pair):
    with pytest.raises(DomainError):
        run_auction(pair, 3, "vcg")
    with pytest.raises(DomainError):
        run_auction(pair, 0, "vcg")


def test_indicator_needs_rank():
    with pytest.raises(DomainError):
        revenue_indicator([[3.0, 1.0]], 2)


def test_outcome_round_trip(tmp_path, triple):
    out = run_auction(triple, 2, "partial_uniform")
    write_outcome(out, tmp_path / "o.json")
    assert read_outcome(tmp_path / "o.json") == out
    assert AuctionOutcome.from_dict(out.to_dict()) == out


def random_bids(rng, n, c):
    return -np.sort(-rng.uniform(0, 10, size=(n, c)), axis=1)


def vcg_by_externality(bids, C, alloc):
    """Classical VCG: others' optimal welfare without i, minus their welfare with i present."""
    pays = []
    for i, k in enumerate(alloc.counts):
        if k == 0:
            pays.append(0.0)
            continue
        others = np.delete(bids, i, axis=0)
        without_i, _ = brute_force_welfare(others, C)
        with_i = welfare_of(bids, alloc) - float(np.sum(bids[i, :k]))
        pays.append(without_i - with_i)
    return pays


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5), c=st.integers(1, 5))
def test_vcg_matches_externality(seed, n, c):
    bids = random_bids(np.random.default_rng(seed), n, c)
    alloc, _ = determine_winners(bids, c)
    got = vcg_payments(bids, alloc)
    assert np.allclose(got, vcg_by_externality(bids, c, alloc), rtol=1e-9, atol=1e-9)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 5), c=st.integers(1, 6))
def test_welfare_equals_brute_force(seed, n, c):
    bids = random_bids(np.random.default_rng(seed), n, c)
    assert run_auction(bids, c, "vcg").welfare == brute_force_welfare(bids, c)[0]


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 9), c=st.integers(1, 9))
def test_partial_uniform_charges_one_price_per_winner(seed, n, c):
    bids = random_bids(np.random.default_rng(seed), n, c)
    alloc, _ = determine_winners(bids, c)
    pay = partial_uniform_payments(bids, alloc)
    for i, k in enumerate(alloc.counts):
        others = np.delete(bids, i, axis=0)
        other_alloc = np.delete(alloc.as_array(), i)
        losing = [others[j, r] for j in range(n - 1) for r in range(other_alloc[j], c)]
        expected = k * max(losing) if k and losing else 0.0
        assert pay[i] == pytest.approx(expected, rel=1e-12)


def test_allocation_total():
    assert Allocation((2, 0, 3)).total == 5
    assert math.isclose(welfare_of([[3.0, 1.0], [2.0, 2.0]], Allocation((1, 1))), 5.0)

"""Flexible multi-unit spectrum auctions with truthful marginal bidding.

Modules: :mod:`~flexauc.scenario` (market instances and radio models),
:mod:`~flexauc.strategy` (demand, pricing and bids), :mod:`~flexauc.auction`
(clearing), :mod:`~flexauc.channelization` (seller's channel count),
:mod:`~flexauc.oracle` (brute-force checks) and :mod:`~flexauc.harness`
(experiments).
"""

from .auction import (
    Allocation,
    AuctionOutcome,
    BidMatrix,
    MechanismError,
    determine_winners,
    kth_highest,
    onebid_auction,
    revenue_indicator,
    run_auction,
)
from .kernels import BACKEND
from .scenario import GenerationConfig, Scenario, generate_scenario
from .strategy import Estimates, optimal_price, true_bid_vector

__version__ = "0.1.0"

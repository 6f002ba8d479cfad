"""FlexAuc clearing: winner determination, payment rules and the OneBid baseline.

Every WSP submits a non-increasing vector of ``C`` marginal bids. The ``C``
largest bids win; ties are broken by the total order (value desc, WSP index
asc, rank asc). Because rows are non-increasing, WSP ``i`` wins exactly its
first ``K_i`` bids.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from . import kernels
from .scenario import DomainError

Mechanism = Literal["vcg", "uniform", "partial_uniform", "onebid"]
MECHANISMS: tuple[str, ...] = ("vcg", "uniform", "partial_uniform")
MONOTONE_TOL = 1e-9


class MechanismError(ValueError):
    """A payment rule is undefined for the given instance."""


class BidMatrix:
    """Validated, read-only ``N x C`` array of marginal bids."""

    __slots__ = ("values",)

    def __init__(self, bids, *, tol: float = MONOTONE_TOL) -> None:
        arr = np.array(bids, dtype=np.float64, order="C", ndmin=2)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DomainError("bids must be a non-empty N x C matrix")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise DomainError("bids must be finite and non-negative")
        if arr.shape[1] > 1:
            rise = np.diff(arr, axis=1)
            if np.any(rise > tol):
                i, k = np.argwhere(rise > tol)[0]
                raise DomainError(f"bid row {i} increases at rank {k + 1}; rows must be non-increasing")
        arr.setflags(write=False)
        self.values = arr

    @classmethod
    def coerce(cls, bids) -> BidMatrix:
        return bids if isinstance(bids, BidMatrix) else cls(bids)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def c(self) -> int:
        return self.values.shape[1]

    def __repr__(self) -> str:
        return f"BidMatrix({self.values.tolist()!r})"


@dataclass(frozen=True)
class Allocation:
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def as_array(self) -> np.ndarray:
        return np.array(self.counts, dtype=np.int64)


@dataclass(frozen=True)
class AuctionOutcome:
    allocation: Allocation
    payments: tuple[float, ...]
    mechanism: str
    revenue: float
    welfare: float
    indicator: float

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation.counts),
            "payments": list(self.payments),
            "revenue": self.revenue,
            "welfare": self.welfare,
            "indicator": self.indicator,
            "mechanism": self.mechanism,
        }

    @classmethod
    def from_dict(cls, d: dict) -> AuctionOutcome:
        return cls(
            allocation=Allocation(tuple(int(k) for k in d["allocation"])),
            payments=tuple(float(p) for p in d["payments"]),
            mechanism=d["mechanism"],
            revenue=float(d["revenue"]),
            welfare=float(d["welfare"]),
            indicator=float(d["indicator"]),
        )


def _check_c(bids: BidMatrix, C: int) -> None:
    if C < 1:
        raise DomainError("C must be >= 1")
    if C != bids.c:
        raise DomainError(f"bid vectors have {bids.c} entries but C = {C}")


def determine_winners(bids, C: int) -> tuple[Allocation, np.ndarray]:
    """Allocation and the ``C`` winning bid values in descending order."""
    bids = BidMatrix.coerce(bids)
    _check_c(bids, C)
    counts, top = kernels.allocate(bids.values, C)
    return Allocation(tuple(int(k) for k in counts)), top


def selection_stats(bids, m: int) -> int:
    """Number of bids the heap selection touches to find the top ``m``."""
    bids = BidMatrix.coerce(bids)
    return int(kernels.top_bids(bids.values, m)[3])


def kth_highest(bids, k: int) -> float:
    bids = BidMatrix.coerce(bids)
    if not 1 <= k <= bids.n * bids.c:
        raise DomainError(f"rank {k} out of range 1..{bids.n * bids.c}")
    values = kernels.top_bids(bids.values, k)[0]
    return float(values[k - 1])


def welfare_of(bids, allocation: Allocation) -> float:
    """Sum of each WSP's first ``K_i`` bids, accumulated WSP by WSP."""
    vals = BidMatrix.coerce(bids).values
    total = 0.0
    for i, k in enumerate(allocation.counts):
        if k:
            total += float(np.cumsum(vals[i, :k])[-1])
    return total


def _counts(bids: BidMatrix, allocation: Allocation) -> np.ndarray:
    counts = allocation.as_array()
    if counts.shape != (bids.n,) or counts.sum() != bids.c or np.any(counts < 0):
        raise DomainError("allocation does not match the bid matrix")
    return counts


def vcg_payments(bids, allocation: Allocation) -> np.ndarray:
    """Each winner pays the ``K_i`` highest losing bids of the other WSPs."""
    bids = BidMatrix.coerce(bids)
    if bids.n < 2:
        raise MechanismError("VCG needs at least two WSPs")
    return kernels.vcg_payments(bids.values, _counts(bids, allocation))


def uniform_price(bids, allocation: Allocation) -> float:
    bids = BidMatrix.coerce(bids)
    if not bids.c < bids.n:
        raise MechanismError(f"uniform pricing needs C < N (C={bids.c}, N={bids.n})")
    return float(kernels.uniform_price(bids.values, _counts(bids, allocation)))


def uniform_payments(bids, allocation: Allocation) -> np.ndarray:
    """Every channel is priced at the top bid of the best WSP that won nothing."""
    bids = BidMatrix.coerce(bids)
    if not bids.c < bids.n:
        raise MechanismError(f"uniform pricing needs C < N (C={bids.c}, N={bids.n})")
    return kernels.uniform_payments(bids.values, _counts(bids, allocation))


def max_loser_bids(bids, allocation: Allocation) -> np.ndarray:
    bids = BidMatrix.coerce(bids)
    return kernels.max_loser_bids(bids.values, _counts(bids, allocation))


def partial_uniform_payments(bids, allocation: Allocation) -> np.ndarray:
    """Winner ``i`` pays ``K_i`` times the highest losing bid of any other WSP."""
    bids = BidMatrix.coerce(bids)
    if bids.n < 2:
        raise MechanismError("partial uniform pricing needs at least two WSPs")
    return kernels.partial_uniform_payments(bids.values, _counts(bids, allocation))


PAYMENT_RULES = {
    "vcg": vcg_payments,
    "uniform": uniform_payments,
    "partial_uniform": partial_uniform_payments,
}


def normalize_mechanism(name: str) -> str:
    key = name.replace("-", "_").lower()
    if key not in PAYMENT_RULES and key != "onebid":
        raise MechanismError(f"unknown mechanism {name!r}")
    return key


def revenue_indicator(bids, C: int) -> float:
    """``C`` times the (C+1)-th highest bid: an upper bound on seller revenue."""
    bids = BidMatrix.coerce(bids)
    if bids.n * bids.c < C + 1:
        raise DomainError("rank C+1 does not exist (need at least two WSPs)")
    return C * kth_highest(bids, C + 1)


def run_auction(bids, C: int, mechanism: str) -> AuctionOutcome:
    mechanism = normalize_mechanism(mechanism)
    bids = BidMatrix.coerce(bids)
    if mechanism == "onebid":
        return onebid_auction(bids.values[:, 0], C)
    _check_c(bids, C)
    alloc, _ = determine_winners(bids, C)
    payments = PAYMENT_RULES[mechanism](bids, alloc)
    return AuctionOutcome(
        allocation=alloc,
        payments=tuple(float(p) for p in payments),
        mechanism=mechanism,
        revenue=math.fsum(payments.tolist()),
        welfare=welfare_of(bids, alloc),
        indicator=revenue_indicator(bids, C),
    )


def onebid_auction(first_bids: Sequence[float], C: int) -> AuctionOutcome:
    """Unit-demand baseline: each WSP bids once and wins at most one channel.

    The ``min(N, C)`` highest bids win one channel each and all pay the
    highest losing bid (0 when every WSP wins). When ``C > N`` channels stay
    unsold, so the allocation total is ``min(N, C)``.
    """
    if C < 1:
        raise DomainError("C must be >= 1")
    first = np.asarray(first_bids, dtype=np.float64)
    n = first.shape[0]
    if n < 1:
        raise DomainError("need at least one bidder")
    if not np.all(np.isfinite(first)) or np.any(first < 0):
        raise DomainError("bids must be finite and non-negative")
    padded = np.zeros((n, C))
    padded[:, 0] = first
    winners = min(n, C)
    values, owners, _, _ = kernels.top_bids(padded, winners)
    counts = np.zeros(n, dtype=np.int64)
    counts[owners] = 1
    price = 0.0
    if winners < n:
        losers = np.flatnonzero(counts == 0)
        price = float(first[losers].max())
    payments = price * counts.astype(np.float64)
    indicator = C * kernels.top_bids(padded, C + 1)[0][C] if n * C >= C + 1 else 0.0
    welfare = 0.0
    for i in range(n):
        if counts[i]:
            welfare += float(first[i])
    return AuctionOutcome(
        allocation=Allocation(tuple(int(k) for k in counts)),
        payments=tuple(float(p) for p in payments),
        mechanism="onebid",
        revenue=math.fsum(payments.tolist()),
        welfare=welfare,
        indicator=float(indicator),
    )


def write_outcome(outcome: AuctionOutcome, path: str | Path) -> None:
    Path(path).write_text(json.dumps(outcome.to_dict(), indent=1) + "\n")


def read_outcome(path: str | Path) -> AuctionOutcome:
    return AuctionOutcome.from_dict(json.loads(Path(path).read_text()))

"""WSP-side economics: end-user demand, service pricing and truthful bids.

All functions are closed forms. ``gross`` below always means the WSP's
revenue from its end users, ``p* x min(aggregate demand, K*B)``, once the
price is set optimally for ``K`` channels of width ``B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .scenario import DomainError

E2 = math.exp(-2.0)


@dataclass(frozen=True)
class PriceDecision:
    price_per_hz: float
    regime: Literal["abundant", "scarce"]


@dataclass(frozen=True)
class Estimates:
    alpha_est: float
    gain_est_hz: float

    def __post_init__(self) -> None:
        if not self.alpha_est > 0 or not self.gain_est_hz > 0:
            raise DomainError("estimates must be positive")


def optimal_user_demand(g_hz: float, price: float, alpha: float) -> float:
    """Bandwidth an end user subscribes to at ``price`` (approximate utility)."""
    return g_hz * math.exp(-1.0 - price / alpha)


def user_utility(g_hz: float, price: float, alpha: float, w_hz: float, exact: bool = False) -> float:
    """End-user utility at demand ``w_hz``.

    ``exact`` uses the Shannon rate ``w ln(1 + g/w)``; otherwise the
    high-SNR approximation ``w ln(g/w)`` that the demand formula is built on.
    """
    if w_hz < 0:
        raise DomainError("w_hz must be non-negative")
    if w_hz == 0:
        return 0.0
    rate = w_hz * (math.log1p(g_hz / w_hz) if exact else math.log(g_hz / w_hz))
    return alpha * rate - price * w_hz


def optimal_price(alpha: float, G_hz: float, K: int, B_hz: float) -> PriceDecision:
    if K < 1 or not B_hz > 0:
        raise DomainError("need K >= 1 and B_hz > 0")
    supply = K * B_hz
    if supply > G_hz * E2:
        return PriceDecision(alpha, "abundant")
    return PriceDecision(alpha * (math.log(G_hz / supply) - 1.0), "scarce")


def wsp_revenue(alpha: float, G_hz: float, K: int, B_hz: float, price: float) -> float:
    """Revenue ``price x min(aggregate demand, K*B)`` at an arbitrary price."""
    demand = G_hz * math.exp(-1.0 - price / alpha)
    return price * min(demand, K * B_hz)


def wsp_gross_revenue(alpha: float, G_hz: float, K: int, B_hz: float) -> float:
    """Revenue with ``K`` channels at the optimal price; 0 for ``K == 0``."""
    if K == 0:
        return 0.0
    p = optimal_price(alpha, G_hz, K, B_hz)
    if p.regime == "abundant":
        return alpha * G_hz * E2
    supply = K * B_hz
    return p.price_per_hz * supply


def gross_curve(alpha: float, G_hz: float, B_hz: float, C: int) -> np.ndarray:
    """``gross(k)`` for k = 0..C, vectorised."""
    k = np.arange(C + 1, dtype=np.float64)
    out = np.full(C + 1, alpha * G_hz * E2)
    out[0] = 0.0
    supply = k[1:] * B_hz
    scarce = supply <= G_hz * E2
    s = supply[scarce]
    out[1:][scarce] = alpha * (np.log(G_hz / s) - 1.0) * s
    return out


def true_bid_vector(alpha: float, G_hz: float, B_hz: float, C: int) -> np.ndarray:
    """Marginal value of each additional channel, clamped at zero."""
    if C < 1:
        raise DomainError("C must be >= 1")
    if not B_hz > 0:
        raise DomainError("B_hz must be positive")
    return np.maximum(np.diff(gross_curve(alpha, G_hz, B_hz, C)), 0.0)


def true_bid_matrix(alphas, gains_hz, B_hz: float, C: int) -> np.ndarray:
    return np.vstack([true_bid_vector(a, g, B_hz, C) for a, g in zip(alphas, gains_hz)])


def h(k: int) -> float:
    """(k-1)^(k-1) / k^k, with 0^0 = 1."""
    if k < 1:
        raise DomainError("k must be >= 1")
    if k == 1:
        return 1.0
    return math.exp((k - 1) * math.log(k - 1) - k * math.log(k))


def channel_width(B0_hz: float, b0_hz: float, C: int) -> float:
    """Width of each of ``C`` equal channels separated by ``C-1`` guard bands."""
    if C < 1:
        raise DomainError("C must be >= 1")
    B = (B0_hz + b0_hz) / C - b0_hz
    if not B > 0:
        raise DomainError(f"{C} channels leave no bandwidth with a {b0_hz} Hz guard band")
    return B


def estimated_bid(est: Estimates, B0_hz: float, b0_hz: float, C: int, k: int) -> float:
    """Seller-side estimate of a WSP's ``k``-th marginal bid when ``C`` channels are sold."""
    if not 1 <= k <= C:
        raise DomainError("need 1 <= k <= C")
    B = channel_width(B0_hz, b0_hz, C)
    value = est.alpha_est * B * (math.log(est.gain_est_hz * h(k) / B) - 1.0)
    return max(0.0, value)


def estimated_bid_vector(est: Estimates, B0_hz: float, b0_hz: float, C: int) -> np.ndarray:
    B = channel_width(B0_hz, b0_hz, C)
    k = np.arange(1, C + 1, dtype=np.float64)
    km1 = k - 1
    # xlogy gives 0*log(0) = 0, i.e. h(1) = 1
    log_h = np.where(km1 > 0, km1 * np.log(np.where(km1 > 0, km1, 1.0)), 0.0) - k * np.log(k)
    values = est.alpha_est * B * (np.log(est.gain_est_hz / B) + log_h - 1.0)
    return np.maximum(values, 0.0)

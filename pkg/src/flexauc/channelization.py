"""Seller-side choice of the channel count.

The seller cannot observe bids before the auction, so it scores each
candidate ``C`` by the revenue indicator evaluated on *estimated* bids and
picks the best. Exhaustive search over ``[1, C_MAX]`` is the reference; the
binary search is only trusted when it lands on the same
optimum value.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .auction import revenue_indicator
from .scenario import DomainError, Scenario
from .strategy import Estimates, channel_width, estimated_bid_vector

DEFAULT_C_CAP = 64


class DegenerateMarketError(ValueError):
    """Every candidate channel count yields a zero indicator."""


class NonUnimodalError(RuntimeError):
    """Binary search disagreed with the exhaustive optimum."""


@dataclass(frozen=True)
class SweepPoint:
    C: int
    B_hz: float
    indicator: float


@dataclass(frozen=True)
class ChannelizationResult:
    best_C: int
    indicator_value: float
    sweep: tuple[SweepPoint, ...]
    c_max: int

    def to_dict(self) -> dict:
        return {
            "best_C": self.best_C,
            "indicator_value": self.indicator_value,
            "c_max": self.c_max,
            "sweep": [asdict(p) for p in self.sweep],
        }


def max_channels(B0_hz: float, b0_hz: float, c_cap: int = DEFAULT_C_CAP) -> int:
    """Largest feasible channel count; ``c_cap`` when there is no guard band."""
    if b0_hz < 0 or not B0_hz > b0_hz:
        raise DomainError("need B0 > b0 >= 0")
    if b0_hz == 0:
        return c_cap
    c = math.floor((B0_hz - b0_hz) / b0_hz)
    # floor of a ratio can round up across an integer boundary
    while c > 1 and not (B0_hz + b0_hz) / c - b0_hz > 0:
        c -= 1
    return max(c, 1)


def estimated_bid_matrix(estimates: Sequence[Estimates], B0_hz: float, b0_hz: float, C: int) -> np.ndarray:
    return np.vstack([estimated_bid_vector(e, B0_hz, b0_hz, C) for e in estimates])


def indicator_at(estimates: Sequence[Estimates], B0_hz: float, b0_hz: float, C: int) -> float:
    return revenue_indicator(estimated_bid_matrix(estimates, B0_hz, b0_hz, C), C)


def sweep(estimates: Sequence[Estimates], B0_hz: float, b0_hz: float, c_max: int) -> tuple[SweepPoint, ...]:
    return tuple(
        SweepPoint(C, channel_width(B0_hz, b0_hz, C), indicator_at(estimates, B0_hz, b0_hz, C))
        for C in range(1, c_max + 1)
    )


def _binary_search(f, lo: int, hi: int) -> int:
    # bisect on the sign of f(m+1) - f(m); correct only for unimodal f
    while lo < hi:
        mid = (lo + hi) // 2
        if f(mid) < f(mid + 1):
            lo = mid + 1
        else:
            hi = mid
    return lo


def optimize_channel_count(
    estimates: Sequence[Estimates],
    B0_hz: float,
    b0_hz: float,
    search: Literal["exhaustive", "binary"] = "exhaustive",
    c_cap: int = DEFAULT_C_CAP,
) -> ChannelizationResult:
    if len(estimates) < 2:
        raise DomainError("need estimates for at least two WSPs")
    c_max = max_channels(B0_hz, b0_hz, c_cap)
    points = sweep(estimates, B0_hz, b0_hz, c_max)
    values = [p.indicator for p in points]
    if max(values) <= 0:
        raise DegenerateMarketError("indicator is zero for every channel count")
    best = int(np.argmax(values)) + 1  # first maximum, i.e. smallest C
    if search == "binary":
        found = _binary_search(lambda c: values[c - 1], 1, c_max)
        if values[found - 1] != values[best - 1]:
            raise NonUnimodalError(
                f"binary search chose C={found} (indicator {values[found - 1]!r}) but the "
                f"exhaustive optimum is C={best} (indicator {values[best - 1]!r})"
            )
        best = found
    elif search != "exhaustive":
        raise ValueError(f"unknown search mode {search!r}")
    return ChannelizationResult(best, values[best - 1], points, c_max)


def scenario_estimates(scenario: Scenario, noise: float = 0.0, seed: int | None = None) -> list[Estimates]:
    """True ``(alpha, G)`` per WSP, optionally scaled by ``U[1-noise, 1+noise]`` factors."""
    if not 0 <= noise < 1:
        raise DomainError("noise must lie in [0, 1)")
    alphas, gains = scenario.alphas, scenario.gains_hz
    if noise > 0:
        rng = np.random.default_rng(np.random.SeedSequence(scenario.seed if seed is None else seed).spawn(3)[2])
        alphas = alphas * rng.uniform(1 - noise, 1 + noise, size=alphas.shape)
        gains = gains * rng.uniform(1 - noise, 1 + noise, size=gains.shape)
    return [Estimates(float(a), float(g)) for a, g in zip(alphas, gains)]


def write_result(result: ChannelizationResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result.to_dict(), indent=1) + "\n")

"""Independent checks of the auction's economic guarantees.

Nothing here reuses the clearing path it is checking: welfare is found by
enumerating every allocation, truthfulness by replaying auctions with a
single deviating bidder, and dominance by comparing full payment vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from . import kernels
from .auction import (
    Allocation,
    AuctionOutcome,
    BidMatrix,
    MechanismError,
    kth_highest,
    normalize_mechanism,
    run_auction,
)
from .scenario import DomainError, GenerationConfig, generate_scenario
from .strategy import (
    channel_width,
    optimal_price,
    true_bid_matrix,
    true_bid_vector,
    wsp_revenue,
)

EQ_TOL = 1e-9
ENUMERATION_LIMIT = 10**7
DEFAULT_RATIOS = tuple(i / 10 for i in range(1, 21))

Relation = Literal["less", "equal", "greater"]


class OracleScaleError(ValueError):
    """Instance too large to enumerate."""


class PropertyViolation(AssertionError):
    """A checked guarantee failed; ``instance`` reproduces it."""

    def __init__(self, message: str, instance: dict) -> None:
        super().__init__(message)
        self.instance = instance


@dataclass(frozen=True)
class TruthTrial:
    wsp: int
    mechanism: str
    truthful_utility: float
    deviant_utility: float
    relation: Relation
    deviant_bids: tuple[float, ...] = ()
    deviant_outcome: AuctionOutcome | None = field(default=None, compare=False, repr=False)


def classify(deviant: float, truthful: float, tol: float = EQ_TOL) -> Relation:
    if deviant > truthful + tol:
        return "greater"
    if deviant < truthful - tol:
        return "less"
    return "equal"


def close_le(a: float, b: float, rel: float = EQ_TOL) -> bool:
    """``a <= b`` up to floating rounding of sums of equal magnitude."""
    return a <= b + rel * max(1.0, abs(a), abs(b))


# -- welfare -------------------------------------------------------------------


def n_allocations(n: int, c: int) -> int:
    return math.comb(c + n - 1, n - 1)


def brute_force_welfare(bids, C: int) -> tuple[float, Allocation]:
    bids = BidMatrix.coerce(bids)
    if C != bids.c:
        raise DomainError("C must equal the bid vector length")
    if n_allocations(bids.n, C) > ENUMERATION_LIMIT:
        raise OracleScaleError(f"{n_allocations(bids.n, C)} allocations exceed the enumeration limit")
    best, counts = kernels.brute_force_welfare(bids.values, C)
    return float(best), Allocation(tuple(int(k) for k in counts))


# -- truthfulness ---------------------------------------------------------------


def perturb_bids(truthful, rng: np.random.Generator, scale: float | None = None) -> np.ndarray:
    """Random monotone deviation from ``truthful``.

    Each entry is scaled by ``U[0.5, 1.5]``, then monotonicity is restored
    with running maxima taken from the tail. All-zero truthful vectors get
    uniform draws on ``[0, scale]`` instead, since scaling cannot move them.
    """
    v = np.asarray(truthful, dtype=np.float64)
    if v.size == 0 or np.any(np.diff(v) > 0) or np.any(v < 0):
        raise DomainError("truthful vector must be non-empty, non-negative and non-increasing")
    zero = not np.any(v > 0)
    if scale is None:
        scale = 1.0 if zero else float(v[0])
    while True:
        if zero:
            out = rng.uniform(0.0, scale, size=v.shape)
        else:
            out = v * rng.uniform(0.5, 1.5, size=v.shape)
        out = np.maximum.accumulate(out[::-1])[::-1]
        if np.any(out > 0) and not np.array_equal(out, v):
            return out


def wsp_utility(true_values: np.ndarray, outcome: AuctionOutcome, wsp: int) -> float:
    """Quasilinear utility: true value of the won channels minus payment."""
    k = outcome.allocation.counts[wsp]
    won = float(np.cumsum(true_values[:k])[-1]) if k else 0.0
    return won - outcome.payments[wsp]


def truthfulness_trial(
    true_bids,
    wsp: int,
    mechanism: str,
    rng: np.random.Generator,
    truthful_outcome: AuctionOutcome | None = None,
) -> TruthTrial:
    true_bids = BidMatrix.coerce(true_bids)
    mechanism = normalize_mechanism(mechanism)
    C = true_bids.c
    if truthful_outcome is None:
        truthful_outcome = run_auction(true_bids, C, mechanism)
    deviant = perturb_bids(true_bids.values[wsp], rng)
    submitted = true_bids.values.copy()
    submitted[wsp] = deviant
    dev_outcome = run_auction(submitted, C, mechanism)
    u_t = wsp_utility(true_bids.values[wsp], truthful_outcome, wsp)
    u_d = wsp_utility(true_bids.values[wsp], dev_outcome, wsp)
    return TruthTrial(wsp, mechanism, u_t, u_d, classify(u_d, u_t), tuple(deviant.tolist()), dev_outcome)


def trial_rng(seed: int, *index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


# -- individual rationality ------------------------------------------------------


def ir_violations(bids, outcome: AuctionOutcome, values=None) -> list[str]:
    """Winners paying more than their bids, or per channel more than b^s_{C+1}.

    ``values`` defaults to the submitted bids; pass true values to check the
    truthful-bidding guarantee.
    """
    bids = BidMatrix.coerce(bids)
    vals = bids.values if values is None else np.asarray(values, dtype=np.float64)
    C = bids.c
    cap = kth_highest(bids, C + 1) if bids.n * C > C else math.inf
    out = []
    for i, (k, pay) in enumerate(zip(outcome.allocation.counts, outcome.payments)):
        if k == 0:
            if pay != 0:
                out.append(f"WSP {i} won nothing but pays {pay!r}")
            continue
        won = float(np.cumsum(vals[i, :k])[-1])
        if not close_le(pay, won):
            out.append(f"WSP {i} pays {pay!r} for channels worth {won!r}")
        if not close_le(pay, k * cap):
            out.append(f"WSP {i} pays {pay!r} > {k} x b^s_(C+1) = {k * cap!r}")
    return out


# -- revenue ordering -------------------------------------------------------------


def dominance_check(bids, C: int) -> tuple[float, float | None, float]:
    """Revenues ``(vcg, uniform, partial)``; uniform is ``None`` unless C < N.

    Raises :class:`PropertyViolation` if partial-uniform revenue falls below
    either of the others.
    """
    bids = BidMatrix.coerce(bids)
    vcg = run_auction(bids, C, "vcg").revenue
    uni = run_auction(bids, C, "uniform").revenue if C < bids.n else None
    part = run_auction(bids, C, "partial_uniform").revenue
    for name, other in (("vcg", vcg), ("uniform", uni)):
        if other is not None and not close_le(other, part):
            raise PropertyViolation(
                f"partial-uniform revenue {part!r} < {name} revenue {other!r}",
                {"bids": bids.values.tolist(), "C": C, "vcg": vcg, "uniform": uni, "partial_uniform": part},
            )
    return vcg, uni, part


def indicator_check(bids, C: int, mechanisms: Iterable[str] = ("vcg", "uniform", "partial_uniform")) -> dict:
    bids = BidMatrix.coerce(bids)
    out = {}
    for m in mechanisms:
        if m == "uniform" and not C < bids.n:
            continue
        o = run_auction(bids, C, m)
        if not close_le(o.revenue, o.indicator):
            raise PropertyViolation(
                f"{m} revenue {o.revenue!r} exceeds indicator {o.indicator!r}",
                {"bids": bids.values.tolist(), "C": C, "mechanism": m},
            )
        out[m] = (o.revenue, o.indicator)
    return out


def tight_indicator_instance(C: int, n_winners: int = 2, high: float = 10.0, loser_bid: float = 3.0) -> np.ndarray:
    """Bids where a total loser holds rank C+1, so every rule earns exactly C x b^s_{C+1}.

    ``n_winners`` WSPs split the ``C`` channels with bids of ``high`` and
    bid ``loser_bid`` on the rest; one more WSP bids ``loser_bid`` once. Zero
    bidders pad the market to ``C < N`` so uniform pricing is defined too.
    With two or more winners every rule prices each channel at ``loser_bid``.
    """
    if n_winners < 2 or C < n_winners:
        raise DomainError("need 2 <= n_winners <= C")
    per = [C // n_winners + (1 if i < C % n_winners else 0) for i in range(n_winners)]
    rows = [[high] * k + [loser_bid] * (C - k) for k in per]
    rows.append([loser_bid] + [0.0] * (C - 1))
    while len(rows) <= C:
        rows.append([0.0] * C)
    return np.array(rows)


# -- pricing -----------------------------------------------------------------------


def price_grid_check(alpha: float, G_hz: float, K: int, B_hz: float,
                     ratios: Sequence[float] = DEFAULT_RATIOS) -> float:
    """Ratio of the optimal price that maximises the WSP's service revenue."""
    if 1.0 not in ratios:
        raise DomainError("ratios must include 1.0")
    p_star = optimal_price(alpha, G_hz, K, B_hz).price_per_hz
    revenues = [wsp_revenue(alpha, G_hz, K, B_hz, r * p_star) for r in ratios]
    best = max(revenues)
    # prefer the optimum itself on exact ties
    if revenues[list(ratios).index(1.0)] == best:
        return 1.0
    return float(ratios[int(np.argmax(revenues))])


# -- batch verification ------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    counterexamples: list
    stats: dict = field(default_factory=dict)


def _random_monotone(rng: np.random.Generator, n: int, c: int) -> np.ndarray:
    raw = rng.uniform(0.0, 10.0, size=(n, c))
    return -np.sort(-raw, axis=1)


def check_welfare(n_instances: int, seed: int, max_n: int = 5, max_c: int = 6) -> CheckResult:
    bad = []
    for t in range(n_instances):
        rng = trial_rng(seed, 1, t)
        n, c = int(rng.integers(2, max_n + 1)), int(rng.integers(1, max_c + 1))
        bids = _random_monotone(rng, n, c)
        best, _ = brute_force_welfare(bids, c)
        got = run_auction(bids, c, "vcg").welfare
        if got != best:
            bad.append({"bids": bids.tolist(), "C": c, "flexauc": got, "brute_force": best})
    return CheckResult("welfare-maximization", not bad, f"{n_instances} instances, {len(bad)} mismatches", bad[:5])


def check_truthfulness(n_scenarios: int, n_perturbations: int, seed: int, C: int = 5,
                       config: GenerationConfig | None = None,
                       mechanisms: Sequence[str] = ("vcg", "uniform", "partial_uniform")) -> CheckResult:
    config = config or GenerationConfig()
    counts = {m: {"less": 0, "equal": 0, "greater": 0} for m in mechanisms}
    bad = []
    ir_bad = []
    for s in range(n_scenarios):
        sc = generate_scenario(config, int(trial_rng(seed, 2, s).integers(2**63)))
        B = channel_width(sc.block.total_bandwidth_hz, sc.block.guard_band_hz, C)
        V = BidMatrix(true_bid_matrix(sc.alphas, sc.gains_hz, B, C))
        for mi, m in enumerate(mechanisms):
            if m == "uniform" and not C < V.n:
                continue
            truthful = run_auction(V, C, m)
            ir_bad.extend(ir_violations(V, truthful))
            for p in range(n_perturbations):
                rng = trial_rng(seed, 3, s, mi, p)
                wsp = int(rng.integers(V.n))
                tr = truthfulness_trial(V, wsp, m, rng, truthful)
                counts[m][tr.relation] += 1
                if tr.relation == "greater":
                    bad.append({"scenario_seed": sc.seed, "C": C, "mechanism": m, "wsp": wsp,
                                "true_bids": V.values.tolist(), "deviant_bids": list(tr.deviant_bids),
                                "truthful_utility": tr.truthful_utility, "deviant_utility": tr.deviant_utility})
    greater = sum(c["greater"] for c in counts.values())
    detail = "; ".join(f"{m}: " + ", ".join(f"{k}={v}" for k, v in c.items()) for m, c in counts.items())
    if ir_bad:
        detail += f"; IR violations: {len(ir_bad)}"
    return CheckResult("truthfulness", greater == 0 and not ir_bad, detail, bad[:5],
                       {"counts": counts, "ir_violations": len(ir_bad)})


def check_dominance(n_instances: int, seed: int, max_n: int = 12, max_c: int = 12) -> CheckResult:
    bad = []
    for t in range(n_instances):
        rng = trial_rng(seed, 4, t)
        n, c = int(rng.integers(2, max_n + 1)), int(rng.integers(1, max_c + 1))
        bids = _random_monotone(rng, n, c)
        try:
            dominance_check(bids, c)
            indicator_check(bids, c)
        except PropertyViolation as exc:
            bad.append({"message": str(exc), **exc.instance})
        for m in ("vcg", "uniform", "partial_uniform"):
            if m == "uniform" and not c < n:
                continue
            v = ir_violations(bids, run_auction(bids, c, m))
            if v:
                bad.append({"message": v[0], "bids": bids.tolist(), "C": c, "mechanism": m})
    return CheckResult("revenue-dominance-indicator-ir", not bad, f"{n_instances} instances, {len(bad)} violations", bad[:5])


def check_bid_monotonicity(n_instances: int, seed: int) -> CheckResult:
    bad = []
    for t in range(n_instances):
        rng = trial_rng(seed, 5, t)
        alpha = rng.uniform(0.05, 2.0)
        G = 10 ** rng.uniform(5, 11)
        B = 10 ** rng.uniform(4, 8)
        C = int(rng.integers(1, 65))
        v = true_bid_vector(alpha, G, B, C)
        if np.any(np.diff(v) > EQ_TOL):
            bad.append({"alpha": alpha, "G_hz": G, "B_hz": B, "C": C})
    return CheckResult("bid-monotonicity", not bad, f"{n_instances} vectors, {len(bad)} non-monotone", bad[:5])


def check_pricing(n_instances: int, seed: int, config: GenerationConfig | None = None, C: int = 5) -> CheckResult:
    config = config or GenerationConfig()
    bad = []
    for t in range(n_instances):
        sc = generate_scenario(config, int(trial_rng(seed, 6, t).integers(2**63)))
        B = channel_width(sc.block.total_bandwidth_hz, sc.block.guard_band_hz, C)
        out = run_auction(true_bid_matrix(sc.alphas, sc.gains_hz, B, C), C, "vcg")
        for i, k in enumerate(out.allocation.counts):
            if k and price_grid_check(sc.alphas[i], sc.gains_hz[i], k, B) != 1.0:
                bad.append({"scenario_seed": sc.seed, "wsp": i, "K": k})
    return CheckResult("optimal-pricing", not bad, f"{n_instances} scenarios, {len(bad)} off-optimum winners", bad[:5])


def run_verification(seed: int = 0, scale: float = 1.0) -> list[CheckResult]:
    """All oracle checks at full size (``scale=1``) or a fraction of it."""
    n = lambda k: max(1, int(round(k * scale)))  # noqa: E731
    return [
        check_welfare(n(1000), seed),
        check_truthfulness(n(100), n(100), seed),
        check_dominance(n(10_000), seed),
        check_bid_monotonicity(n(10_000), seed),
        check_pricing(n(100), seed),
    ]


__all__ = [
    "MechanismError",
    "OracleScaleError",
    "PropertyViolation",
    "TruthTrial",
    "brute_force_welfare",
    "classify",
    "dominance_check",
    "indicator_check",
    "ir_violations",
    "perturb_bids",
    "price_grid_check",
    "run_verification",
    "tight_indicator_instance",
    "truthfulness_trial",
    "wsp_utility",
]

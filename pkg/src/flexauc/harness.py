"""Seeded Monte Carlo experiments with CSV output.

Each experiment is a pure function of ``(config, trial index)``, so trials
can run in any order on any number of worker processes and still produce
byte-identical CSV files.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .auction import BidMatrix, onebid_auction, revenue_indicator, run_auction
from .channelization import estimated_bid_matrix, max_channels, scenario_estimates
from .oracle import DEFAULT_RATIOS, ir_violations, trial_rng, truthfulness_trial
from .scenario import MHZ, ConfigError, GenerationConfig, Scenario, generate_scenario
from .strategy import channel_width, optimal_price, true_bid_matrix, wsp_revenue

WORKERS_ENV = "FLEXAUC_WORKERS"

EXPERIMENTS = (
    "pricing-grid",
    "bid-structure",
    "truthfulness",
    "payment-comparison",
    "onebid-comparison",
    "channelization-sweep",
    "guard-band-sweep",
)

# (parameter columns, metric columns); every CSV starts with experiment, trial
SCHEMAS: dict[str, tuple[tuple[str, ...], tuple[str, ...]]] = {
    "pricing-grid": (("C", "wsp", "ratio"), ("K", "utility", "relative_utility", "is_argmax")),
    "bid-structure": (("C", "wsp", "k"), ("bid", "monotone")),
    "truthfulness": (("C", "mechanism"), ("less", "equal", "greater", "max_gain", "ir_violations")),
    "payment-comparison": (
        ("C",),
        ("vcg_revenue", "uniform_revenue", "partial_revenue", "indicator",
         "uniform_ratio", "partial_ratio", "ir_violations"),
    ),
    "onebid-comparison": (
        ("C", "mechanism"),
        ("flex_revenue", "flex_welfare", "flex_indicator", "onebid_revenue", "onebid_welfare",
         "onebid_indicator", "welfare_gap", "revenue_gap", "ir_violations"),
    ),
    "channelization-sweep": (
        ("b0_mhz", "C"),
        ("B_mhz", "indicator_est", "indicator", "vcg_revenue", "partial_revenue", "welfare",
         "best_C", "ir_violations"),
    ),
}
SCHEMAS["guard-band-sweep"] = SCHEMAS["channelization-sweep"]

COUNT_METRICS = {"less", "equal", "greater", "ir_violations", "is_argmax", "monotone"}


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    trials: int = 100
    seed: int = 0
    scenario: GenerationConfig = field(default_factory=GenerationConfig)
    mechanisms: tuple[str, ...] | None = None
    channels: tuple[int, ...] | None = None
    guard_bands_mhz: tuple[float, ...] | None = None
    perturbations: int = 100
    ratios: tuple[float, ...] = DEFAULT_RATIOS
    noise: float = 0.0
    c_cap: int = 64

    def __post_init__(self) -> None:
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {EXPERIMENTS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for key, value in DEFAULTS[self.name].items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        for key in ("mechanisms", "channels", "guard_bands_mhz"):
            if getattr(self, key) is not None:
                object.__setattr__(self, key, tuple(getattr(self, key)))
        object.__setattr__(self, "ratios", tuple(self.ratios))
        self._validate()

    def _validate(self) -> None:
        n = self.scenario.n_wsps
        bad = []
        if self.mechanisms:
            for m in self.mechanisms:
                if m not in ("vcg", "uniform", "partial_uniform"):
                    bad.append(f"unknown mechanism {m!r}")
            if "uniform" in self.mechanisms:
                bad.extend(f"uniform pricing with C={c} >= N={n}" for c in self.channels or () if c >= n)
            if n < 2:
                bad.append("payment rules need N >= 2")
        if self.channels is not None and any(c < 1 for c in self.channels):
            bad.append("channel counts must be >= 1")
        if self.name == "pricing-grid" and 1.0 not in self.ratios:
            bad.append("ratios must include 1.0")
        if bad:
            raise ConfigError("invalid experiment points: " + "; ".join(bad))

    @classmethod
    def from_dict(cls, d: dict[str, Any], **overrides: Any) -> ExperimentConfig:
        d = {**d, **{k: v for k, v in overrides.items() if v is not None}}
        if "scenario" in d and isinstance(d["scenario"], dict):
            d["scenario"] = GenerationConfig.from_dict(d["scenario"])
        for key in ("mechanisms",):
            if d.get(key) is not None:
                d[key] = tuple(m.replace("-", "_") for m in d[key])
        return cls(**d)


DEFAULTS: dict[str, dict[str, Any]] = {
    "pricing-grid": {"channels": (5,), "mechanisms": ("vcg",)},
    "bid-structure": {"channels": (5,)},
    "truthfulness": {"channels": (5,), "mechanisms": ("vcg", "uniform", "partial_uniform")},
    "payment-comparison": {"channels": (3, 5, 7, 20, 30)},
    "onebid-comparison": {"channels": tuple(range(1, 10)), "mechanisms": ("partial_uniform",)},
    "channelization-sweep": {},
    "guard-band-sweep": {"guard_bands_mhz": (0.0, 0.1, 0.5, 1.0)},
}


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    trial: int
    params: dict[str, Any]
    metrics: dict[str, Any]

    def row(self) -> dict[str, Any]:
        return {"experiment": self.experiment, "trial": self.trial, **self.params, **self.metrics}


def scenario_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, np.uint64)[0])


def trial_scenario(config: ExperimentConfig, trial: int, guard_band_hz: float | None = None) -> Scenario:
    gen = config.scenario
    if guard_band_hz is not None:
        gen = gen.with_guard_band(guard_band_hz)
    return generate_scenario(gen, scenario_seed(config.seed, trial))


def _true_bids(sc: Scenario, C: int) -> BidMatrix:
    B = channel_width(sc.block.total_bandwidth_hz, sc.block.guard_band_hz, C)
    return BidMatrix(true_bid_matrix(sc.alphas, sc.gains_hz, B, C))


def _audited(bids: BidMatrix, C: int, mechanism: str, tally: list[int]):
    out = run_auction(bids, C, mechanism)
    tally[0] += len(ir_violations(bids, out))
    return out


# -- experiment bodies -----------------------------------------------------------


def _pricing_grid(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    sc = trial_scenario(cfg, trial)
    recs = []
    for C in cfg.channels:
        B = channel_width(sc.block.total_bandwidth_hz, sc.block.guard_band_hz, C)
        bids = _true_bids(sc, C)
        tally = [0]
        out = _audited(bids, C, cfg.mechanisms[0], tally)
        for i, K in enumerate(out.allocation.counts):
            if K == 0:
                continue
            a, G = sc.alphas[i], sc.gains_hz[i]
            p_star = optimal_price(a, G, K, B).price_per_hz
            utils = [wsp_revenue(a, G, K, B, r * p_star) - out.payments[i] for r in cfg.ratios]
            u1 = utils[cfg.ratios.index(1.0)]
            best = max(utils)
            for r, u in zip(cfg.ratios, utils):
                recs.append(ResultRecord(cfg.name, trial, {"C": C, "wsp": i + 1, "ratio": r}, {
                    "K": K,
                    "utility": u,
                    "relative_utility": u / u1 if u1 else math.nan,
                    "is_argmax": int(u == best),
                }))
    return recs


def _bid_structure(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    sc = trial_scenario(cfg, trial)
    recs = []
    for C in cfg.channels:
        vals = _true_bids(sc, C).values
        for i, row in enumerate(vals):
            mono = int(not np.any(np.diff(row) > 1e-9))
            for k, b in enumerate(row, start=1):
                recs.append(ResultRecord(cfg.name, trial, {"C": C, "wsp": i + 1, "k": k}, {"bid": float(b), "monotone": mono}))
    return recs


def _truthfulness(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    sc = trial_scenario(cfg, trial)
    recs = []
    for C in cfg.channels:
        V = _true_bids(sc, C)
        for mi, m in enumerate(cfg.mechanisms):
            tally = [0]
            truthful = _audited(V, C, m, tally)
            counts = {"less": 0, "equal": 0, "greater": 0}
            max_gain = 0.0
            for p in range(cfg.perturbations):
                rng = trial_rng(cfg.seed, trial, C, mi, p)
                wsp = int(rng.integers(V.n))
                tr = truthfulness_trial(V, wsp, m, rng, truthful)
                counts[tr.relation] += 1
                max_gain = max(max_gain, tr.deviant_utility - tr.truthful_utility)
                dev = V.values.copy()
                dev[wsp] = tr.deviant_bids
                tally[0] += len(ir_violations(dev, tr.deviant_outcome))
            recs.append(ResultRecord(cfg.name, trial, {"C": C, "mechanism": m},
                                     {**counts, "max_gain": max_gain, "ir_violations": tally[0]}))
    return recs


def _payment_comparison(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    sc = trial_scenario(cfg, trial)
    recs = []
    for C in cfg.channels:
        V = _true_bids(sc, C)
        tally = [0]
        vcg = _audited(V, C, "vcg", tally).revenue
        uni = _audited(V, C, "uniform", tally).revenue if C < V.n else None
        part = _audited(V, C, "partial_uniform", tally).revenue
        recs.append(ResultRecord(cfg.name, trial, {"C": C}, {
            "vcg_revenue": vcg,
            "uniform_revenue": uni,
            "partial_revenue": part,
            "indicator": revenue_indicator(V, C),
            "uniform_ratio": None if uni is None else (uni / vcg if vcg else math.nan),
            "partial_ratio": part / vcg if vcg else math.nan,
            "ir_violations": tally[0],
        }))
    return recs


def _onebid_comparison(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    sc = trial_scenario(cfg, trial)
    recs = []
    for C in cfg.channels:
        V = _true_bids(sc, C)
        for m in cfg.mechanisms:
            tally = [0]
            flex = _audited(V, C, m, tally)
            one = onebid_auction(V.values[:, 0], C)
            recs.append(ResultRecord(cfg.name, trial, {"C": C, "mechanism": m}, {
                "flex_revenue": flex.revenue,
                "flex_welfare": flex.welfare,
                "flex_indicator": flex.indicator,
                "onebid_revenue": one.revenue,
                "onebid_welfare": one.welfare,
                "onebid_indicator": one.indicator,
                "welfare_gap": flex.welfare - one.welfare,
                "revenue_gap": flex.revenue - one.revenue,
                "ir_violations": tally[0],
            }))
    return recs


def _sweep_records(cfg: ExperimentConfig, trial: int, guard_bands_hz: Iterable[float]) -> list[ResultRecord]:
    recs = []
    for b0 in guard_bands_hz:
        sc = trial_scenario(cfg, trial, guard_band_hz=b0)
        B0 = sc.block.total_bandwidth_hz
        ests = scenario_estimates(sc, cfg.noise)
        c_hi = min(max_channels(B0, b0, cfg.c_cap), cfg.c_cap)
        rows = []
        for C in range(1, c_hi + 1):
            est_ind = revenue_indicator(estimated_bid_matrix(ests, B0, b0, C), C)
            V = _true_bids(sc, C)
            tally = [0]
            vcg = _audited(V, C, "vcg", tally)
            part = _audited(V, C, "partial_uniform", tally)
            rows.append((C, channel_width(B0, b0, C), est_ind, vcg, part, tally[0]))
        best = max(rows, key=lambda r: (r[2], -r[0]))[0]
        for C, B, est_ind, vcg, part, irv in rows:
            recs.append(ResultRecord(cfg.name, trial, {"b0_mhz": b0 / MHZ, "C": C}, {
                "B_mhz": B / MHZ,
                "indicator_est": est_ind,
                "indicator": vcg.indicator,
                "vcg_revenue": vcg.revenue,
                "partial_revenue": part.revenue,
                "welfare": vcg.welfare,
                "best_C": best,
                "ir_violations": irv,
            }))
    return recs


def _channelization_sweep(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    b0s = cfg.guard_bands_mhz or (cfg.scenario.block.guard_band_hz / MHZ,)
    return _sweep_records(cfg, trial, [b * MHZ for b in b0s])


def _guard_band_sweep(cfg: ExperimentConfig, trial: int) -> list[ResultRecord]:
    return _sweep_records(cfg, trial, [b * MHZ for b in cfg.guard_bands_mhz])


BODIES = {
    "pricing-grid": _pricing_grid,
    "bid-structure": _bid_structure,
    "truthfulness": _truthfulness,
    "payment-comparison": _payment_comparison,
    "onebid-comparison": _onebid_comparison,
    "channelization-sweep": _channelization_sweep,
    "guard-band-sweep": _guard_band_sweep,
}


def _run_trial(args: tuple[ExperimentConfig, int]) -> list[ResultRecord]:
    cfg, trial = args
    return BODIES[cfg.name](cfg, trial)


def worker_count(workers: int | None = None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, workers)


def run_records(config: ExperimentConfig, workers: int | None = None) -> list[ResultRecord]:
    workers = worker_count(workers)
    jobs = [(config, t) for t in range(config.trials)]
    if workers == 1:
        chunks = map(_run_trial, jobs)
        return [r for chunk in chunks for r in chunk]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunks = pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * workers)))
        return [r for chunk in chunks for r in chunk]


# -- output ----------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    return str(v)


def columns(name: str) -> list[str]:
    params, metrics = SCHEMAS[name]
    return ["experiment", "trial", *params, *metrics]


def to_csv(name: str, records: Sequence[ResultRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = columns(name)
    w.writerow(cols)
    for r in records:
        row = r.row()
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def summarize(records: Sequence[ResultRecord]) -> dict[str, Any]:
    """Per-parameter-point means over trials, plus totals of count metrics."""
    if not records:
        raise ValueError("no records to summarize")
    names = {r.experiment for r in records}
    if len(names) != 1:
        raise ValueError(f"records mix experiments: {sorted(names)}")
    name = names.pop()
    params, metrics = SCHEMAS[name]
    groups: dict[tuple, list[ResultRecord]] = {}
    for r in records:
        groups.setdefault(tuple(r.params[p] for p in params), []).append(r)
    out_groups = []
    for key in sorted(groups, key=lambda k: tuple((str(type(x)), x) for x in k)):
        rs = groups[key]
        g: dict[str, Any] = dict(zip(params, key))
        g["n"] = len(rs)
        for m in metrics:
            xs = [r.metrics[m] for r in rs if r.metrics[m] is not None and not _isnan(r.metrics[m])]
            if not xs:
                g[f"{m}_mean"] = None
                continue
            g[f"{m}_mean"] = math.fsum(xs) / len(xs)
            if m.endswith("_ratio"):
                g[f"{m}_min"] = min(xs)
                g[f"{m}_max"] = max(xs)
        out_groups.append(g)
    totals = {
        m: sum(int(r.metrics[m]) for r in records)
        for m in metrics if m in COUNT_METRICS
    }
    return {"experiment": name, "n_records": len(records), "groups": out_groups, "totals": totals}


def _isnan(x: Any) -> bool:
    return isinstance(x, float) and math.isnan(x)


def _json_default(o: Any) -> Any:
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(type(o))


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None,
                   workers: int | None = None) -> list[ResultRecord]:
    """Run all trials; with ``out_dir`` also write ``<name>.csv`` and ``<name>.summary.json``."""
    records = run_records(config, workers)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{config.name}.csv").write_text(to_csv(config.name, records))
        summary = summarize(records)
        summary["config"] = _config_dict(config)
        text = json.dumps(_clean(summary), indent=1, sort_keys=True, default=_json_default)
        (out / f"{config.name}.summary.json").write_text(text + "\n")
    return records


def _clean(o: Any) -> Any:
    # JSON has no NaN
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, float) and not math.isfinite(o):
        return None
    return o


def _config_dict(config: ExperimentConfig) -> dict[str, Any]:
    d = asdict(config)
    return d


def with_overrides(config: ExperimentConfig, **kw: Any) -> ExperimentConfig:
    return replace(config, **kw)

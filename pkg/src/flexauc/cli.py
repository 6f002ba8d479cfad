"""Command line entry point: ``flexauc <subcommand>`` (or ``python -m flexauc``)."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .auction import run_auction, write_outcome
from .channelization import optimize_channel_count, scenario_estimates, write_result
from .harness import EXPERIMENTS, ExperimentConfig, run_experiment, summarize
from .oracle import run_verification
from .scenario import MHZ, GenerationConfig, generate_scenario, read_scenario, write_scenario
from .strategy import channel_width, true_bid_matrix


def _load_json(path: str | None) -> dict:
    return json.loads(Path(path).read_text()) if path else {}


def cmd_gen_scenario(args: argparse.Namespace) -> int:
    config = GenerationConfig.from_dict(_load_json(args.config))
    write_scenario(generate_scenario(config, args.seed), args.out)
    return 0


def cmd_run_auction(args: argparse.Namespace) -> int:
    sc = read_scenario(args.scenario)
    C = args.channels
    B = channel_width(sc.block.total_bandwidth_hz, sc.block.guard_band_hz, C)
    bids = true_bid_matrix(sc.alphas, sc.gains_hz, B, C)
    outcome = run_auction(bids, C, args.mechanism)
    write_outcome(outcome, args.out)
    return 0


def cmd_optimize_channels(args: argparse.Namespace) -> int:
    sc = read_scenario(args.scenario)
    ests = scenario_estimates(sc, args.noise)
    result = optimize_channel_count(
        ests, sc.block.total_bandwidth_hz, args.guard_band_mhz * MHZ, search=args.search, c_cap=args.c_cap
    )
    write_result(result, args.out)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_verification(seed=args.seed, scale=args.scale)
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    if failed and args.out:
        report = {r.name: {"detail": r.detail, "counterexamples": r.counterexamples} for r in failed}
        Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
        print(f"counterexamples written to {args.out}")
    return 1 if failed else 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_dict(_load_json(args.config), name=args.name, trials=args.trials, seed=args.seed)
    records = run_experiment(config, args.out_dir, workers=args.workers)
    s = summarize(records)
    print(f"{config.name}: {s['n_records']} records -> {Path(args.out_dir) / (config.name + '.csv')}")
    if s["totals"]:
        print("totals: " + ", ".join(f"{k}={v}" for k, v in sorted(s["totals"].items())))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flexauc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scenario", help="generate a seeded random market instance")
    g.add_argument("--config", help="generation config JSON (defaults if omitted)")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_scenario)

    a = sub.add_parser("run-auction", help="clear one auction on a scenario's truthful bids")
    a.add_argument("--scenario", required=True)
    a.add_argument("--channels", type=int, required=True)
    a.add_argument("--mechanism", required=True, choices=["vcg", "uniform", "partial-uniform", "onebid"])
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_run_auction)

    o = sub.add_parser("optimize-channels", help="choose the channel count maximising the revenue indicator")
    o.add_argument("--scenario", required=True)
    o.add_argument("--guard-band-mhz", type=float, required=True)
    o.add_argument("--noise", type=float, default=0.0, help="relative estimate noise in [0, 1)")
    o.add_argument("--search", choices=["exhaustive", "binary"], default="exhaustive")
    o.add_argument("--c-cap", type=int, default=64, help="channel ceiling when the guard band is 0")
    o.add_argument("--out", required=True)
    o.set_defaults(func=cmd_optimize_channels)

    v = sub.add_parser("verify", help="run the oracle property checks")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--scale", type=float, default=1.0, help="fraction of the full instance counts")
    v.add_argument("--out", help="counterexample JSON written on failure")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    e.add_argument("--name", required=True, choices=EXPERIMENTS)
    e.add_argument("--config", help="experiment config JSON")
    e.add_argument("--trials", type=int)
    e.add_argument("--seed", type=int)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--workers", type=int, help="worker processes (default: $FLEXAUC_WORKERS or 1)")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Compare the compiled and pure-Python clearing kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from flexauc import kernels


def instances(rng, n, c, count):
    return [np.ascontiguousarray(-np.sort(-rng.uniform(0, 10, size=(n, c)), axis=1)) for _ in range(count)]


def workload(mod, mats):
    for bids in mats:
        c = bids.shape[1]
        counts, _ = mod.allocate(bids, c)
        mod.vcg_payments(bids, counts)
        mod.partial_uniform_payments(bids, counts)
        if c < bids.shape[0]:
            mod.uniform_payments(bids, counts)


def brute(mod, mats):
    for bids in mats:
        mod.brute_force_welfare(bids, bids.shape[1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases = {
        "clear N=10 C=5 (x2000)": (workload, instances(rng, 10, 5, 2000)),
        "clear N=10 C=64 (x500)": (workload, instances(rng, 10, 64, 500)),
        "clear N=200 C=200 (x50)": (workload, instances(rng, 200, 200, 50)),
        "brute force N=5 C=6 (x200)": (brute, instances(rng, 5, 6, 200)),
    }
    backends = kernels.available_backends()
    print(f"{'case':32s}" + "".join(f"{m.BACKEND:>12s}" for m in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, (fn, mats) in cases.items():
        times = [min(timeit.repeat(lambda: fn(m, mats), number=1, repeat=args.repeat)) for m in backends]
        line = f"{name:32s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) > 1:
            line += f"{times[0] / times[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()

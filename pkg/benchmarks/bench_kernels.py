#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times whole trials of each process on representative graphs with both
backends and prints per-trial latency plus the speedup.  Results are
identical across backends by construction (verified by the test suite);
this only measures speed.

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from selfstab_mis import backend, coins
from selfstab_mis.dynamics import ProcessKind, init_states
from selfstab_mis.graph import gen_complete, gen_gnp, gen_random_tree
from selfstab_mis.switch import switch_init

CASES = [
    ("two-state / K_512 / all-white", ProcessKind.TWO_STATE,
     lambda: gen_complete(512), "all-white", 200),
    ("two-state / G(1024, 0.08) / uniform", ProcessKind.TWO_STATE,
     lambda: gen_gnp(1024, 0.08, seed=1), "uniform-random", 200),
    ("two-state / tree n=4096 / uniform", ProcessKind.TWO_STATE,
     lambda: gen_random_tree(4096, 2), "uniform-random", 100),
    ("three-state / K_1024 / uniform", ProcessKind.THREE_STATE,
     lambda: gen_complete(1024), "uniform-random", 100),
    ("three-color / K_256 / all-gray", ProcessKind.THREE_COLOR,
     lambda: gen_complete(256), "all-gray", 20),
]


def run_case(impl, proc, g, init, trials, seed=7):
    colors0 = init_states(proc, g.n, init, seed).colors
    levels0, zth = None, 0
    if proc is ProcessKind.THREE_COLOR:
        levels0 = switch_init(g.n, "all-five", seed).levels
        zth = coins.threshold_for_probability(2.0**-7)
    total_rounds = 0
    t0 = time.perf_counter()
    for i in range(trials):
        s = coins.derive_trial_seed(seed, i)
        out = impl.run_trial_kernel(g.indptr, g.indices, colors0, proc.value,
                                    s, 10**6, 0, levels0, zth)
        total_rounds += out["rounds"]
    return time.perf_counter() - t0, total_rounds


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true",
                    help="quarter of the trials per case")
    args = ap.parse_args()

    names = backend.available_backends()
    print(f"available backends: {', '.join(names)}")
    header = f"{'case':42s} " + "".join(f"{n:>14s}" for n in names) + \
        ("   speedup" if len(names) == 2 else "")
    print(header)
    print("-" * len(header))
    for label, proc, make_graph, init, trials in CASES:
        if args.quick:
            trials = max(5, trials // 4)
        g = make_graph()
        row = f"{label:42s} "
        per_trial = {}
        for name in names:
            impl = backend.get_impl(name)
            dt, rounds = run_case(impl, proc, g, init, trials)
            per_trial[name] = dt / trials
            row += f"{per_trial[name] * 1e3:11.3f} ms"
        if len(names) == 2:
            row += f"   {per_trial['python'] / per_trial['compiled']:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()

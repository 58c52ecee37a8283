#!/usr/bin/env python3
"""Benchmark the compiled fiber-scaling kernel against the NumPy fallback.

Times one full adjustment sweep (one fiber rescaling per dimension) and a
complete balancing run at the two reference problem sizes, for every
kernel backend importable in this environment.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from multiras import BalanceConfig, available_kernels
from multiras.balancing import _run_iterations, _scale_dimension

SHAPES = ((82, 82, 14), (82, 82, 4))


def build_instance(shape, seed):
    rng = np.random.default_rng(seed)
    truth = rng.lognormal(0.0, 1.0, shape)
    targets = [np.ascontiguousarray(truth.sum(axis=d)) for d in range(truth.ndim)]
    start = truth * rng.uniform(0.5, 2.0, shape)
    return start, targets


def bench_sweep(kernels, start, targets, repeat):
    best = float("inf")
    for _ in range(repeat):
        x = start.copy()
        t0 = time.perf_counter()
        for d in range(x.ndim):
            _scale_dimension(x, targets[d], d, kernels)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_balance(kernels, start, targets, repeat):
    config = BalanceConfig(margin_threshold=1e-6)
    best = float("inf")
    iterations = 0
    for _ in range(repeat):
        x = start.copy()
        t0 = time.perf_counter()
        _, iterations, _, _, _ = _run_iterations(x, targets, config, kernels)
        best = min(best, time.perf_counter() - t0)
    return best, iterations


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5, help="best-of-N timing (default 5)")
    args = parser.parse_args()

    backends = available_kernels()
    print(f"kernel backends: {', '.join(backends)}")
    header = f"{'shape':>12} {'backend':>10} {'sweep':>12} {'balance':>12} {'sweeps':>7}"
    print(header)
    print("-" * len(header))
    for shape in SHAPES:
        start, targets = build_instance(shape, seed=7)
        rows = {}
        for name, kernels in backends.items():
            sweep = bench_sweep(kernels, start, targets, args.repeat)
            total, iterations = bench_balance(kernels, start, targets, args.repeat)
            rows[name] = (sweep, total)
            label = "x".join(str(n) for n in shape)
            print(
                f"{label:>12} {name:>10} {sweep * 1e3:>10.3f}ms {total * 1e3:>10.3f}ms "
                f"{iterations:>7}"
            )
        if len(rows) == 2:
            ratio = rows["python"][0] / rows["compiled"][0]
            print(f"{'':>12} {'speedup':>10} {ratio:>11.2f}x")


if __name__ == "__main__":
    main()

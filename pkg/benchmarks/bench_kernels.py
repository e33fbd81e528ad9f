#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sliceminer import _kernels


def timeit(fn, args, repeat):
    fn(*args)  # warm (numba compiles here)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_tail(repeat):
    for population, successes, draws, observed in [
            (300, 230, 21, 14),
            (14_653, 12_486, 8_538, 6_800),
            (1_000_000, 900_000, 50_000, 43_000)]:
        yield (f"hypergeom tail N={population:,} n={draws:,}",
               (_kernels._nb_hypergeom_lower_tail,
                _kernels._np_hypergeom_lower_tail),
               (population, successes, draws, observed))


def bench_window(repeat):
    rng = np.random.default_rng(0)
    for size in (1_000, 100_000, 2_000_000):
        values = np.sort(rng.uniform(0, 1, size))
        m = size // 10
        yield (f"min-width window len={size:,}",
               (_kernels._nb_min_width_window, _kernels._np_min_width_window),
               (values, m))


def bench_split(repeat):
    rng = np.random.default_rng(1)
    for size in (1_000, 100_000, 2_000_000):
        values = np.sort(rng.integers(0, size // 4, size).astype(np.float64))
        truth = (rng.random(size) < 0.8).astype(np.uint8)
        yield (f"best-split scan len={size:,}",
               (_kernels._nb_best_split_scan, _kernels._np_best_split_scan),
               (values, truth, 10))


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not _kernels.NUMBA_AVAILABLE:
        print("numba is not importable; nothing to compare")
        return 1

    print(f"{'kernel':<42} {'numba':>12} {'numpy':>12} {'speedup':>9}")
    for gen in (bench_tail, bench_window, bench_split):
        for name, (nb_fn, np_fn), call_args in gen(args.repeat):
            t_nb = timeit(nb_fn, call_args, args.repeat)
            t_np = timeit(np_fn, call_args, args.repeat)
            print(f"{name:<42} {t_nb * 1e3:>10.3f}ms {t_np * 1e3:>10.3f}ms "
                  f"{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Compiled kernels against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``; prints one line per kernel.
"""
import timeit

import numpy as np

from radbound import _fallback

try:
    from radbound import _kernels
except ImportError:
    _kernels = None


def cases():
    rng = np.random.default_rng(0)
    signs_table = rng.uniform(-1, 1, (64, 14))
    dist_table = rng.uniform(-1, 1, (1500, 32))
    cover_table = rng.uniform(-1, 1, (40, 8))
    d = _fallback.pairwise_distances(cover_table)
    adj = d <= np.quantile(d, 0.25)
    big = _fallback.pairwise_distances(dist_table) <= 0.9
    return [
        ("exact_sign_average 64x14", "exact_sign_average", (signs_table,)),
        ("pairwise_distances 1500x32", "pairwise_distances", (dist_table,)),
        ("greedy_cover 1500 rows", "greedy_cover", (big,)),
        ("exact_cover 40 rows", "exact_cover", (adj,)),
    ]


def best_time(func, args, repeat=3):
    number = 1
    while timeit.timeit(lambda: func(*args), number=number) < 0.2 and number < 1 << 12:
        number *= 2
    return min(timeit.repeat(lambda: func(*args), number=number, repeat=repeat)) / number


def main():
    print(f"{'kernel':32s} {'python [s]':>12s} {'compiled [s]':>13s} {'speedup':>8s}")
    for label, name, args in cases():
        slow = best_time(getattr(_fallback, name), args)
        if _kernels is None:
            print(f"{label:32s} {slow:12.4g} {'n/a':>13s} {'n/a':>8s}")
            continue
        fast = best_time(getattr(_kernels, name), args)
        print(f"{label:32s} {slow:12.4g} {fast:13.4g} {slow / fast:8.1f}")


if __name__ == "__main__":
    main()

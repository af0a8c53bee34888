"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row reports the best wall time per backend and the speedup.  The python
backend is slow on orbit iteration, so the sizes below are kept modest.
"""

import argparse
import time

from shadowlab import kernels
from shadowlab.maps import SmoothMap


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    f = SmoothMap.logistic(4.0)
    s = SmoothMap.sine(0.95)
    grid = f.grid(200_000)
    return [
        ("iterate logistic N=2e5", lambda b: kernels.iterate(f, 0.1234, 200_000, backend=b)),
        ("iterate sine N=2e5", lambda b: kernels.iterate(s, 0.1234, 200_000, backend=b)),
        ("adjacent_gaps 2e5 pts n=10", lambda b: kernels.adjacent_gaps(f, grid, 10, backend=b)),
        ("sweep_cover 2e5 pts n=10", lambda b: kernels.sweep_cover(f, grid, 10, 0.1, backend=b)),
        ("separated_greedy 2e4 pts n=8",
         lambda b: kernels.separated_greedy(f, grid[::10], 8, 0.1, backend=b)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        kernels.backend_module("compiled")
    except ImportError:
        print("compiled kernels are not built; nothing to compare")
        return
    print(f"{'kernel':32s} {'compiled [s]':>13s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn in cases():
        tc = best_time(lambda: fn("compiled"), args.repeat)
        tp = best_time(lambda: fn("python"), args.repeat)
        print(f"{name:32s} {tc:13.4f} {tp:11.4f} {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()

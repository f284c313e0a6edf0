"""Compare the numba and numpy kernel backends.

Run with ``python3 benchmarks/bench_backends.py [--sizes 100 250 500] [--repeat 3]``.
Prints the best-of-``repeat`` wall time of each kernel per backend and checks
that both backends return the same answer.
"""

import argparse
import time

import numpy as np

from rankcpd.halton import generate_halton
from rankcpd.kernels import _numba, _numpy


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        started = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - started)
    return min(times), out


def cases(n, rng):
    pts = rng.normal(size=(n, 3))
    grid = generate_halton(n, 3).points
    cost = _numpy.squared_distances(pts, grid)
    f, g = rng.normal(size=n), rng.normal(size=n)
    return {
        "linear_assignment": lambda b: b.linear_assignment(cost),
        "gibbs_kernel": lambda b: b.gibbs_kernel(f, g, cost, 0.1, -300.0),
        "distances": lambda b: b.distances(pts, grid),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 250, 500])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    # compile once outside the timings
    for fn in cases(4, rng).values():
        fn(_numba)

    print(f"{'kernel':<18} {'n':>5} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  same")
    for n in args.sizes:
        for name, fn in cases(n, rng).items():
            t_numba, a = best_time(lambda: fn(_numba), args.repeat)
            t_numpy, b = best_time(lambda: fn(_numpy), args.repeat)
            same = np.array_equal(a, b) if name == "linear_assignment" else np.allclose(a, b)
            print(f"{name:<18} {n:>5} {t_numba:>10.4f} {t_numpy:>10.4f} "
                  f"{t_numpy / t_numba:>8.1f}  {same}")


if __name__ == "__main__":
    main()

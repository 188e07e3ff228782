"""Time the numba and numpy Hoelder pair-scan kernels against each other.

    python3 benchmarks/bench_kernels.py [--pairs N] [--repeat R]

The numba timings exclude the first (compiling) call.
"""
import argparse
import time

import numpy as np

from sqg_halfplane import _kernels
from sqg_halfplane.grid import GridSpec
from sqg_halfplane.presets import preset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=256, help="grid size n1 (n2 = n - 1)")
    args = ap.parse_args()

    grid = GridSpec(args.n, args.n - 1)
    v = np.zeros((grid.n1, grid.n2 + 2))
    v[:, 1:-1] = preset("random_band", grid, j_lo=0, j_hi=5, seed=3).values
    rng = np.random.default_rng(0)
    idx = [rng.integers(0, s, args.pairs) for s in (v.shape[0], v.shape[1]) * 2]
    i1, j1, i2, j2 = idx[0], idx[1], idx[2], idx[3]
    pa = (v, i1, j1, i2, j2, grid.dx1, grid.dx2, grid.L1, 0.25)

    # warm-up compiles the numba versions
    _kernels.pair_quotient_max_numba(*pa)
    _kernels.neighbour_quotient_max_numba(v, grid.dx1, grid.dx2, 0.25)

    rows = [
        ("pair scan", lambda: _kernels.pair_quotient_max_numpy(*pa),
         lambda: _kernels.pair_quotient_max_numba(*pa)),
        ("neighbour scan",
         lambda: _kernels.neighbour_quotient_max_numpy(v, grid.dx1, grid.dx2, 0.25),
         lambda: _kernels.neighbour_quotient_max_numba(v, grid.dx1, grid.dx2, 0.25)),
    ]
    print(f"grid {grid.n1}x{grid.n2}, {args.pairs} pairs, best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, f_np, f_nb in rows:
        a, b = f_np(), f_nb()
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a)), (a, b)
        t_np = best_of(f_np, args.repeat) * 1e3
        t_nb = best_of(f_nb, args.repeat) * 1e3
        print(f"{name:<16}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()

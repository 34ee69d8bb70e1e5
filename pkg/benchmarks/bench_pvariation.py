#!/usr/bin/env python3
"""Benchmark the compiled p-variation kernel against the pure-Python twin.

Runs the extrema reduction + O(e^2) dynamic program on synthetic rough
samples of growing size and prints a timing table.  Both backends are
imported directly (no env tricks), and their outputs are compared before
timing.

Usage: python benchmarks/bench_pvariation.py [--sizes 256,1024,4096]
"""

import argparse
import time

import numpy as np

from livsic import _pvar_py

try:
    from livsic import _pvar_ext
except ImportError:
    _pvar_ext = None


def rough_sample(rng, n):
    """Alternating-heavy sample: nearly every point is a local extremum."""
    return np.cumsum(rng.uniform(-1, 1, n)) + 0.45 * rng.choice([-1.0, 1.0], n)


def run_backend(kernel, vals, p):
    ext = kernel.local_extrema_indices(vals)
    if p == 1.0:
        return kernel.pvar_p1(vals)
    return kernel.pvar_dp(vals[ext], p)


def time_backend(kernel, vals, p, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = run_backend(kernel, vals, p)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="256,1024,4096")
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(0)

    if _pvar_ext is None:
        print("compiled kernel not built; showing pure-Python timings only")
    header = f"{'n':>7}  {'python (s)':>12}"
    if _pvar_ext is not None:
        header += f"  {'ext (s)':>12}  {'speedup':>8}"
    print(f"p = {args.p}")
    print(header)
    for n in sizes:
        vals = rough_sample(rng, n)
        t_py, out_py = time_backend(_pvar_py, vals, args.p, args.repeats)
        line = f"{n:>7}  {t_py:>12.4f}"
        if _pvar_ext is not None:
            t_ex, out_ex = time_backend(_pvar_ext, vals, args.p, args.repeats)
            assert abs(out_py[0] - out_ex[0]) == 0.0, "backend outputs differ"
            assert np.array_equal(out_py[1], out_ex[1]), "backend witnesses differ"
            line += f"  {t_ex:>12.4f}  {t_py / max(t_ex, 1e-12):>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()

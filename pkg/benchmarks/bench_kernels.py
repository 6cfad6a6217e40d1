"""Benchmark the numba kernels against the pure-numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

The same inputs go through both implementations; reported times are the
best of `repeat` runs, after one warmup call to absorb JIT compilation.
"""

import argparse
import time

import numpy as np

from circlecover._accel import numba_impl, numpy_impl
from circlecover.density import PiecewisePolyDensity
from circlecover.sequences import Harmonic


def build_cases():
    gen = np.random.default_rng(0)
    f = PiecewisePolyDensity.step()
    bp, c0, c1, cum = f.tables()

    n = 100_000
    # c = 0.3 keeps the circle uncovered over the whole horizon, so the
    # subtract engine runs all n steps instead of exiting early
    ell = Harmonic(0.3).prefix(n)
    radii = 0.5 * ell
    centers = gen.random(n)
    lo = (centers - radii) % 1.0
    hi = (centers + radii) % 1.0
    t_s, t_e = np.array([0.0]), np.array([1.0])
    cps = np.array([10, 100, 1000, 10_000, n], dtype=np.int64)
    pts = gen.random(64)

    return [
        ("kahan_cumsum (1e5)", "kahan_cumsum", (ell,)),
        ("cover_trajectory (1e5 steps)", "cover_trajectory",
         (lo, hi, t_s, t_e, cps)),
        ("point_first_hits (64 pts x 1e5)", "point_first_hits",
         (centers, radii, pts)),
        ("log_survival_partials (1e5)", "log_survival_partials",
         (bp, c0, c1, cum, 0.3, radii, cps)),
        ("ball_mass_array (1e5)", "ball_mass_array",
         (bp, c0, c1, cum, 0.3, radii)),
    ]


def best_time(fn, args, repeat):
    fn(*args)  # warmup / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'kernel':38s} {'numba':>10s} {'numpy':>10s} {'speedup':>8s}")
    for label, name, inputs in build_cases():
        t_nb = best_time(getattr(numba_impl, name), inputs, args.repeat)
        t_np = best_time(getattr(numpy_impl, name), inputs, args.repeat)
        print(f"{label:38s} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms "
              f"{t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()

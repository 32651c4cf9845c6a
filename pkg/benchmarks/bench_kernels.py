"""Benchmark the numba-compiled kernels against the vectorized numpy path.

Run:  python benchmarks/bench_kernels.py
The same comparison can be forced package-wide with PEAKFDR_DISABLE_NUMBA=1.
"""

import time

import numpy as np

from peakfdr import _kernels
from peakfdr._accel import NUMBA_ENABLED
from peakfdr.ksample import joint_null_model
from peakfdr.palm import effective_bandwidth, noise_moments


def timeit(fn, *args, repeat=5, number=20):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def main():
    rng = np.random.default_rng(42)
    rows = []

    taps, _ = _kernels.gaussian_taps(4.0, 1.0, 6.0)
    taps = taps / taps.sum()
    y = _kernels.circular_convolve(rng.standard_normal(100_000), taps)
    rows.append(("local_maxima (L=1e5)",
                 _kernels._local_maxima_jit, _kernels._local_maxima_np, (y,)))

    mom = noise_moments(1.0, effective_bandwidth(4.0, 3.0))
    us = rng.standard_normal(100_000) * mom.sigma_gamma
    args = (us, mom.sigma_gamma_sq, mom.lambda2, mom.lambda4, mom.delta)
    rows.append(("peak_tails (n=1e5)", _kernels._peak_tails_jit, _kernels._peak_tails_np, args))

    model = joint_null_model(mom, 2)
    heights = np.abs(rng.standard_normal(200)) * mom.sigma_gamma
    nbs = heights - np.abs(rng.standard_normal(200)) * 0.1
    jargs = (heights, nbs, model.rho, model.conditional_sd,
             mom.sigma_gamma_sq, mom.lambda2, mom.lambda4, mom.delta,
             1e-8, 1e-12, 200, 10.0)
    rows.append(("joint_pvalues (200 candidates)",
                 _kernels._joint_pvalues_jit, _kernels._joint_pvalues_np, jargs))

    print(f"numba enabled: {NUMBA_ENABLED}")
    header = f"{'kernel':38s} {'numba path':>12s} {'numpy path':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, jit_fn, np_fn, fnargs in rows:
        jit_fn(*fnargs)  # warm up / compile
        t_np = timeit(np_fn, *fnargs, number=3 if "joint" in name else 20)
        t_jit = timeit(jit_fn, *fnargs, number=3 if "joint" in name else 20)
        print(f"{name:38s} {t_jit * 1e3:10.3f}ms {t_np * 1e3:10.3f}ms {t_np / t_jit:7.1f}x")
    if not NUMBA_ENABLED:
        print("note: numba disabled; the 'numba path' column ran interpreted")


if __name__ == "__main__":
    main()

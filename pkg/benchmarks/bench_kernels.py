"""Time the numba kernels against their numpy fallbacks, then a full fit per backend.

Run: python benchmarks/bench_kernels.py [--n 20000] [--k 8] [--d 5]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from mmgmm import _accel, _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(n, k, d, repeat):
    gen = np.random.default_rng(0)
    x = gen.normal(size=(n, d))
    means = gen.normal(size=(k, d))
    chols = np.stack([np.linalg.cholesky(np.cov(gen.normal(size=(4 * d, d)).T) + np.eye(d)) for _ in range(k)])
    logw = np.log(np.full(k, 1.0 / k))
    w = gen.random(n)
    cases = {
        "log_gauss_matrix": (
            lambda: _kernels.log_gauss_matrix_numpy(x, means, chols, logw),
            lambda: _kernels.log_gauss_matrix_numba(x, means, chols, logw),
        ),
        "weighted_scatter": (
            lambda: _kernels.weighted_scatter_numpy(x, w, means[0]),
            lambda: _kernels.weighted_scatter_numba(x, w, means[0]),
        ),
        "mahalanobis_rows": (
            lambda: _kernels.mahalanobis_rows_numpy(chols[0], x - means[0]),
            lambda: _kernels.mahalanobis_rows_numba(chols[0], x - means[0]),
        ),
    }
    print(f"kernels  n={n} k={k} d={d}  (best of {repeat})")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, (f_np, f_nb) in cases.items():
        f_nb()  # compile
        t_np, t_nb = best_of(f_np, repeat), best_of(f_nb, repeat)
        print(f"{name:<18}{1e3 * t_np:>12.2f}{1e3 * t_nb:>12.2f}{t_np / t_nb:>10.1f}x")


FIT_SNIPPET = """
import time, numpy as np
from mmgmm import BACKEND, FitConfig, MixtureModel, RandomSource, fit, sample_dataset
truth = MixtureModel.from_arrays(np.full({k}, 1/{k}), 4 * np.random.default_rng(1).normal(size=({k}, {d})),
                                 [np.eye({d})] * {k})
data, _ = sample_dataset(truth, {n}, RandomSource(2))
fit(data, {k}, FitConfig(max_iter=2))
t0 = time.perf_counter()
_, trace = fit(data, {k}, FitConfig(max_iter=50, rel_tol=1e-300))
print(BACKEND, trace.iterations, time.perf_counter() - t0)
"""


def bench_fit(n, k, d):
    print(f"\nfit  n={n} k={k} d={d}, 50 iterations")
    for disable in ("0", "1"):
        env = dict(os.environ, MMGMM_DISABLE_NUMBA=disable)
        out = subprocess.run(
            [sys.executable, "-c", FIT_SNIPPET.format(n=n, k=k, d=d)],
            env=env, capture_output=True, text=True, check=True,
        ).stdout.split()
        print(f"{out[0]:<8}{float(out[2]):8.3f} s")


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--n", type=int, default=20000)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    bench_kernels(args.n, args.k, args.d, args.repeat)
    bench_fit(args.n, args.k, args.d)


if __name__ == "__main__":
    main()

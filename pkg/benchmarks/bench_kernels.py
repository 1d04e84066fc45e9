"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--quick]

Prints one row per (kernel, N) with the best-of-repeats time for each
backend and the speedup.
"""

import argparse
import time

import numpy as np

from spectral_mra import kernels
from spectral_mra.signal import normalize_bispectrum, signal_bispectrum


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(sizes, M):
    rng = np.random.default_rng(0)
    for N in sizes:
        rows = rng.standard_normal((M, N))
        H = np.fft.rfft(rows, axis=1)

        def acc(be, H=H, N=N):
            be.accumulate_spectra(H, N, np.zeros(H.shape[1]), np.zeros((N, N), complex), True)

        x = rng.standard_normal(N)
        Bt = normalize_bispectrum(signal_bispectrum(x - x.mean(), subtract_mean=True))
        yield f"accumulate (M={M})", N, acc
        yield "jacobi_eigh", N, lambda be, Bt=Bt: be.jacobi_eigh(Bt, 1e-14, 60)
        yield "frequency_marching", N, lambda be, Bt=Bt: be.frequency_marching(Bt)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--quick", action="store_true")
    args = p.parse_args(argv)
    sizes = (16, 41, 64) if args.quick else (16, 32, 41, 64, 128)
    M = 2000 if args.quick else 10_000
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled backend not built; timing the Python fallback only")
    print(f"{'kernel':<24}{'N':>5}{'python [s]':>14}{'compiled [s]':>14}{'speedup':>10}")
    for name, N, fn in cases(sizes, M):
        t_py = best_of(lambda: fn(kernels.python_backend), 3)
        if compiled is None:
            print(f"{name:<24}{N:>5}{t_py:>14.3e}{'-':>14}{'-':>10}")
            continue
        t_c = best_of(lambda: fn(compiled), 5)
        print(f"{name:<24}{N:>5}{t_py:>14.3e}{t_c:>14.3e}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()

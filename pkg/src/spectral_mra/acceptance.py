"""Exit criteria for the package, runnable from the CLI (``spectral-mra selftest --full``).

Each ``criterion_*`` function returns a :class:`Criterion` carrying pass/fail,
the measured numbers, and the threshold they were held to.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .baselines import frequency_marching
from .experiment import ExperimentConfig, derive_seed, run_experiment, summary
from .invariants import (InvariantAccumulator, accumulate_observations, bispectrum_noise_bias,
                         merge, raw_bispectrum_mean)
from .oracles import bispectrum_triple_product, relative_error_exhaustive
from .pipeline import clean_invariants, invert
from .reconstruct import assemble
from .signal import bispectrum, normalize_bispectrum, phase_array, relative_error, signal_bispectrum
from .simulate import generate_gaussian_signal, generate_observations
from .spectral import hermitian_eig, spectral_phase_recovery


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _zero_mean_signal(rng, N):
    x = rng.standard_normal(N)
    return x - x.mean()


def _unit_phases(x):
    y = np.fft.fft(x - x.mean())
    y[0] = 0.0
    z = phase_array(y)
    z[0] = 1.0
    return z


def criterion_1(n_signals=100, sizes=(5, 8, 16, 41, 64), seed=1):
    """Spectral method on exact invariants recovers zero-mean signals to 1e-8, in under 30 s."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for N in sizes:
        for _ in range(n_signals):
            x = _zero_mean_signal(rng, N)
            res = invert(clean_invariants(x), "spectral")
            worst = max(worst, relative_error(x, res.x_hat)[0])
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-8 and elapsed < 30.0
    return Criterion(1, "clean exact recovery", ok,
                     f"max rel_error {worst:.2e} (< 1e-8) over {n_signals} signals x N in {list(sizes)}, "
                     f"runtime {elapsed:.1f}s (< 30s)", elapsed)


def criterion_2(instances=50, seed=2):
    """Eigenvalues of the normalized bispectrum are the DFT of the phases; eigenvectors have modulus 1/sqrt(N)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_val = worst_mod = 0.0
    for _ in range(instances):
        N = int(rng.integers(3, 65))
        x = _zero_mean_signal(rng, N)
        Bt = normalize_bispectrum(signal_bispectrum(x, subtract_mean=True))
        eig = hermitian_eig(Bt)
        lam_ref = np.sort(np.fft.fft(_unit_phases(x)).real)[::-1]
        worst_val = max(worst_val, np.abs(eig.eigenvalues - lam_ref).max())
        worst_mod = max(worst_mod, np.abs(np.abs(eig.eigenvectors) - 1 / np.sqrt(N)).max())
    ok = worst_val < 1e-6 and worst_mod < 1e-8
    return Criterion(2, "eigenstructure identity", ok,
                     f"max eigenvalue diff {worst_val:.2e} (< 1e-6), max |u|-1/sqrt(N) {worst_mod:.2e} (< 1e-8), "
                     f"{instances} instances N<=64", time.perf_counter() - t0)


def criterion_3(N=41, sigma=1.0, M=100_000, seed=3):
    """Raw-bispectrum diagonal bias and power-spectrum unbiasedness at M = 1e5."""
    t0 = time.perf_counter()
    # offset keeps y[0] well away from zero so the bias term is resolvable
    x = generate_gaussian_signal(N, seed) + 1.0
    obs = generate_observations(x, M, sigma, derive_seed(seed, 7)).observations
    y = np.fft.fft(x)
    B_clean = bispectrum(y)
    B_raw = raw_bispectrum_mean(obs)
    predicted = bispectrum_noise_bias(y[0].real, N, sigma)
    k = np.arange(1, N)
    measured = (B_raw - B_clean)[k, k].real
    expect = predicted[k, k]
    rel_dev = np.abs(measured - expect) / np.abs(expect)
    ok_a = rel_dev.max() < 0.2
    P_hat = accumulate_observations(obs).power_spectrum(sigma)
    per_obs = np.abs(np.fft.fft(obs, axis=1)) ** 2
    se = per_obs.std(axis=0, ddof=1) / np.sqrt(M)
    z = np.abs(P_hat - np.abs(y) ** 2) / se
    ok_b = z.max() < 3.0
    return Criterion(3, "bias formulas", ok_a and ok_b,
                     f"(a) diagonal bias N*sigma^2*y[0]={expect[0]:.1f}, worst relative deviation "
                     f"{rel_dev.max():.3f} (< 0.2); (b) worst |P_hat-P|/SE {z.max():.2f} (< 3)",
                     time.perf_counter() - t0)


def criterion_4(N=41, sigma=1.0, M_small=1_000, M_large=100_000, trials=50, seed=4):
    """Estimator error shrinks ~10x from M=1e3 to M=1e5 (band [5, 20])."""
    t0 = time.perf_counter()
    errs = {"B": {M_small: [], M_large: []}, "P": {M_small: [], M_large: []}}
    for t in range(trials):
        x = generate_gaussian_signal(N, derive_seed(seed, 1, t))
        obs = generate_observations(x, M_large, sigma, derive_seed(seed, 2, t)).observations
        B_true = signal_bispectrum(x, subtract_mean=True)
        P_true = np.abs(np.fft.fft(x)) ** 2
        acc = InvariantAccumulator(N).add_batch(obs[:M_small])
        for M in (M_small, M_large):
            if M == M_large:
                acc.add_batch(obs[M_small:])
            errs["B"][M].append(np.linalg.norm(acc.bispectrum() - B_true))
            errs["P"][M].append(np.abs(acc.power_spectrum(sigma) - P_true).max())
    rB = np.mean(errs["B"][M_small]) / np.mean(errs["B"][M_large])
    rP = np.mean(errs["P"][M_small]) / np.mean(errs["P"][M_large])
    ok = 5 <= rB <= 20 and 5 <= rP <= 20
    return Criterion(4, "estimator convergence rates", ok,
                     f"bispectrum Frobenius error ratio {rB:.2f}, power spectrum sup-error ratio {rP:.2f} "
                     f"(both in [5, 20]), {trials} trials", time.perf_counter() - t0)


def criterion_5(trials=20, seed=5):
    """Spectral error non-increasing in M; known-shift oracle lowest at every M (sigma = 1)."""
    t0 = time.perf_counter()
    grid = [100, 1_000, 10_000, 100_000]
    cfg = ExperimentConfig(N=41, M_grid=grid, sigma_grid=[1.0], trials=trials, seed=seed,
                           methods=["spectral", "oracle"])
    s = summary(run_experiment(cfg))
    spec = [s[("spectral", 1.0, M)]["rel_error"] for M in grid]
    orac = [s[("oracle", 1.0, M)]["rel_error"] for M in grid]
    mono = all(b <= a for a, b in zip(spec, spec[1:]))
    lowest = all(o < sp for o, sp in zip(orac, spec))
    return Criterion(5, "error vs M ordering", mono and lowest,
                     "spectral " + ", ".join(f"{e:.4f}" for e in spec) + "; oracle "
                     + ", ".join(f"{e:.4f}" for e in orac) + f" over M={grid}",
                     time.perf_counter() - t0)


def criterion_6(trials=50, seed=6):
    """Spectral warm start needs fewer phase-synchronization iterations than random starts."""
    t0 = time.perf_counter()
    sigmas = [0.5, 1.0]
    cfg = ExperimentConfig(N=41, M_grid=[10_000], sigma_grid=sigmas, trials=trials, seed=seed,
                           methods=["phase-sync-random", "phase-sync-spectral"])
    s = summary(run_experiment(cfg))
    it = {(m, sg): s[(m, sg, 10_000)]["iterations"] for m in cfg.methods for sg in sigmas}
    gaps = {sg: it[("phase-sync-random", sg)] - it[("phase-sync-spectral", sg)] for sg in sigmas}
    ok = all(g > 0 for g in gaps.values()) and gaps[0.5] >= gaps[1.0]
    detail = "; ".join(f"sigma={sg}: random {it[('phase-sync-random', sg)]:.2f} vs spectral "
                       f"{it[('phase-sync-spectral', sg)]:.2f} iterations" for sg in sigmas)
    return Criterion(6, "warm-start iteration savings", ok,
                     detail + f"; savings {gaps[0.5]:.2f} at sigma=0.5 >= {gaps[1.0]:.2f} at sigma=1",
                     time.perf_counter() - t0)


def criterion_7(trials=50, seed=7):
    """At sigma = 0.3 the spectral estimate is within 3x of its 15-iteration refinement."""
    t0 = time.perf_counter()
    cfg = ExperimentConfig(N=41, M_grid=[10_000], sigma_grid=[0.3], trials=trials, seed=seed,
                           methods=["spectral", "phase-sync-spectral"], sync_max_iters=15)
    s = summary(run_experiment(cfg))
    spec = s[("spectral", 0.3, 10_000)]["rel_error"]
    ref = s[("phase-sync-spectral", 0.3, 10_000)]["rel_error"]
    return Criterion(7, "low-noise comparability", spec <= 3 * ref,
                     f"spectral {spec:.5f} vs refined {ref:.5f}, ratio {spec / ref:.2f} (<= 3)",
                     time.perf_counter() - t0)


def _best_time(fn, reps):
    best = np.inf
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def _paired_ratio(small, large, rounds=5, reps=2):
    """Median over rounds of time(large) / time(small), timed back to back so machine drift cancels."""
    ratios = []
    for _ in range(rounds):
        ts = _best_time(small, reps)
        tl = _best_time(large, reps)
        ratios.append(tl / ts)
    return float(np.median(ratios))


def timing_ratios(seed=8):
    rng = np.random.default_rng(seed)
    M = 20_000
    obs = {N: rng.standard_normal((M, N)) for N in (32, 64)}
    r_acc = _paired_ratio(lambda: InvariantAccumulator(32).add_batch(obs[32]),
                          lambda: InvariantAccumulator(64).add_batch(obs[64]))
    # several matrices per size smooth out sweep-count differences
    mats = {N: [normalize_bispectrum(signal_bispectrum(_zero_mean_signal(rng, N), subtract_mean=True))
                for _ in range(3)] for N in (64, 128)}

    def spec(N):
        return lambda: [spectral_phase_recovery(B) for B in mats[N]]

    r_spec = _paired_ratio(spec(64), spec(128), rounds=3)
    reps = 100 if kernels.BACKEND == "compiled" else 5

    def fm(N):
        return lambda: [frequency_marching(mats[N][0]) for _ in range(reps)]

    r_fm = _paired_ratio(fm(64), fm(128), rounds=7)
    return r_acc, r_spec, r_fm


def criterion_8(seed=8):
    """Cost scalings: accumulation O(N^2), spectral inversion O(N^3), frequency marching O(N^2)."""
    t0 = time.perf_counter()
    r_acc, r_spec, r_fm = timing_ratios(seed)
    ok = 3 <= r_acc <= 6 and 4 <= r_spec <= 16 and 3 <= r_fm <= 6
    return Criterion(8, "complexity scalings", ok,
                     f"accumulate N=32->64 x{r_acc:.2f} (in [3, 6]); spectral N=64->128 x{r_spec:.2f} "
                     f"(in [4, 16]); frequency marching N=64->128 x{r_fm:.2f} (in [3, 6]); "
                     f"backend {kernels.BACKEND}", time.perf_counter() - t0)


def criterion_9(seed=9):
    """Fast paths agree with their brute-force oracles."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    # relative_error vs exhaustive search, including exact and near ties
    rel_ok = True
    for i in range(300):
        N = int(rng.integers(2, 65))
        x = rng.standard_normal(N)
        kind = i % 4
        if kind == 0:
            xh = rng.standard_normal(N)
        elif kind == 1:
            xh = np.roll(x, int(rng.integers(N))) + 1e-3 * rng.standard_normal(N)
        elif kind == 2:
            xh = -(x - x.mean())
        else:
            xh = np.ones(N)
        fast, exact = relative_error(x, xh), relative_error_exhaustive(x, xh)
        rel_ok &= fast[1] == exact[1] and abs(fast[0] - exact[0]) <= 1e-12
    # merge vs sequential
    x = generate_gaussian_signal(17, seed)
    obs = generate_observations(x, 1000, 1.0, seed).observations
    seq = InvariantAccumulator(17)
    for row in obs:
        seq.add(row)
    halves = merge(accumulate_observations(obs[:500]), accumulate_observations(obs[500:]))

    def rdiff(a, b):
        return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(np.asarray(b)), 1e-300)

    merge_dev = max(rdiff(halves.mean(), seq.mean()), rdiff(halves.sigma(), seq.sigma()),
                    rdiff(halves.power_spectrum(1.0), seq.power_spectrum(1.0)),
                    rdiff(halves.bispectrum(), seq.bispectrum()))
    # matrix form vs triple product
    form_dev = 0.0
    for N in (2, 5, 8, 41):
        y = np.fft.fft(rng.standard_normal(N))
        ref = bispectrum_triple_product(y)
        form_dev = max(form_dev, np.abs(bispectrum(y) - ref).max() / np.abs(ref).max())
    # frequency marching vs spectral on clean data
    fm_dev = 0.0
    for N in (5, 8, 16, 41, 64):
        for _ in range(20):
            x = _zero_mean_signal(rng, N)
            inv = clean_invariants(x)
            xs, xf = invert(inv, "spectral").x_hat, invert(inv, "fm").x_hat
            fm_dev = max(fm_dev, relative_error(x, xs)[0], relative_error(x, xf)[0], relative_error(xs, xf)[0])
    ok = rel_ok and merge_dev <= 1e-12 and form_dev <= 1e-12 and fm_dev < 1e-8
    return Criterion(9, "oracle equivalences", ok,
                     f"relative_error fast==exhaustive: {rel_ok}; merge vs sequential {merge_dev:.1e} (<= 1e-12); "
                     f"Hadamard vs triple product {form_dev:.1e} (<= 1e-12); FM vs spectral {fm_dev:.1e} (< 1e-8)",
                     time.perf_counter() - t0)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)
FAST_CRITERIA = (criterion_1, criterion_2, criterion_9)


def run(criteria=CRITERIA, echo=print):
    results = []
    for fn in criteria:
        t0 = time.perf_counter()
        res = fn()
        res.seconds = time.perf_counter() - t0
        if echo:
            echo(res.line())
        results.append(res)
    return results

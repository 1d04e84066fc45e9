import numpy as np
import pytest

from spectral_mra.baselines import DegenerateFrequencyError, frequency_marching, iterative_phase_synchronization
from spectral_mra.pipeline import clean_invariants, invert
from spectral_mra.signal import normalize_bispectrum, phase_array, relative_error, signal_bispectrum
from spectral_mra.simulate import random_phases
from spectral_mra.spectral import spectral_phase_recovery

from conftest import zero_mean


def clean_Bt(x):
    return normalize_bispectrum(signal_bispectrum(x, subtract_mean=True))


def unit_phases(x):
    y = np.fft.fft(x - x.mean())
    y[0] = 0
    z = phase_array(y)
    z[0] = 1
    return z


def test_fm_small_exact(rng):
    x = zero_mean(rng, 5)
    assert relative_error(x, invert(clean_invariants(x), "fm").x_hat)[0] < 1e-10


@pytest.mark.parametrize("N", [2, 3, 4, 5, 8, 16, 41, 64])
def test_fm_agrees_with_spectral_on_clean(rng, N):
    for _ in range(100 if N == 41 else 12):
        x = zero_mean(rng, N)
        inv = clean_invariants(x)
        assert relative_error(x, invert(inv, "fm").x_hat)[0] < 1e-8
        assert relative_error(x, invert(inv, "spectral").x_hat)[0] < 1e-8


def test_fm_impulse():
    np.testing.assert_allclose(frequency_marching(clean_Bt(np.eye(7)[0])), np.ones(7), atol=1e-12)


def test_fm_degenerate_frequency():
    Bt = np.ones((9, 9), complex)
    Bt[2, 4] = Bt[4, 2] = -1
    with pytest.raises(DegenerateFrequencyError) as info:
        frequency_marching(Bt)
    assert info.value.k == 4


def test_fm_rejects_non_square():
    with pytest.raises(ValueError):
        frequency_marching(np.ones((3, 4)))


def test_sync_fixed_point_at_truth(rng):
    x = zero_mean(rng, 19)
    z0 = unit_phases(x)
    z, trace = iterative_phase_synchronization(clean_Bt(x), z0, max_iters=1)
    np.testing.assert_allclose(trace.iterates[1], z0, atol=1e-10)


def test_sync_spectral_init_converges_fast(rng):
    x = zero_mean(rng, 41)
    Bt = clean_Bt(x)
    _, trace = iterative_phase_synchronization(Bt, spectral_phase_recovery(Bt))
    assert trace.converged_at is not None and trace.converged_at <= 2


def test_sync_gauge_invariance(rng):
    N = 21
    x = zero_mean(rng, N)
    inv = clean_invariants(x)
    Bt = normalize_bispectrum(inv.bispectrum)
    init = random_phases(N, 4)
    ramp = np.exp(-2j * np.pi * 5 * np.arange(N) / N)
    from spectral_mra.reconstruct import assemble
    errs = []
    for z0 in (init, init * ramp):
        z, _ = iterative_phase_synchronization(Bt, z0, max_iters=30, keep_iterates=False)
        errs.append(relative_error(x, assemble(inv.mean, inv.power_spectrum, z).x_hat)[0])
    assert errs[0] == pytest.approx(errs[1], abs=1e-9)


def test_sync_residuals_decrease_on_clean():
    meds = []
    traces = []
    for t in range(30):
        x = zero_mean(np.random.default_rng(t), 15)
        _, tr = iterative_phase_synchronization(clean_Bt(x), random_phases(15, t), max_iters=8, tol=1e-300)
        traces.append(tr.residuals)
    meds = np.median(np.array(traces), axis=0)
    assert np.all(np.diff(meds) <= 1e-12)


def test_sync_deterministic(rng):
    Bt = clean_Bt(zero_mean(rng, 13) + 0.3 * rng.standard_normal(13))
    a = iterative_phase_synchronization(Bt, random_phases(13, 1))[1]
    b = iterative_phase_synchronization(Bt, random_phases(13, 1))[1]
    assert a.residuals == b.residuals
    for u, v in zip(a.iterates, b.iterates):
        np.testing.assert_array_equal(u, v)


@pytest.mark.parametrize("kwargs", [dict(init=np.ones(5) * 2), dict(init=np.exp(1j * np.ones(5))),
                                    dict(init=np.ones(4)), dict(max_iters=0), dict(tol=0)])
def test_sync_validation(kwargs):
    args = dict(Bt=np.ones((5, 5), complex), init=np.ones(5, complex))
    args.update(kwargs)
    with pytest.raises(ValueError):
        iterative_phase_synchronization(**args)


def test_sync_reports_non_convergence(rng):
    Bt = clean_Bt(rng.standard_normal(17))
    _, tr = iterative_phase_synchronization(Bt, random_phases(17, 2), max_iters=1, tol=1e-300)
    assert tr.converged_at is None and tr.iterations == 1


@pytest.mark.slow
def test_warm_start_fewer_iterations():
    from spectral_mra.experiment import ExperimentConfig, run_experiment, summary
    cfg = ExperimentConfig(M_grid=[10_000], sigma_grid=[1.0], trials=50, seed=12,
                           methods=["phase-sync-random", "phase-sync-spectral"])
    s = summary(run_experiment(cfg))
    assert s[("phase-sync-spectral", 1.0, 10_000)]["iterations"] < s[("phase-sync-random", 1.0, 10_000)]["iterations"]

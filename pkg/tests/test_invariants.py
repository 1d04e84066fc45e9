import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_mra.invariants import (InvariantAccumulator, Invariants, accumulate, accumulate_observations,
                                     bispectrum_noise_bias, merge, merge_all, raw_bispectrum_mean,
                                     read_invariants, write_invariants)
from spectral_mra.oracles import sequential_estimates
from spectral_mra.signal import bispectrum, cyclic_shift, signal_bispectrum
from spectral_mra.simulate import generate_gaussian_signal, generate_observations


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(np.asarray(b)), 1e-300)


def assert_same_estimates(a, b, tol=1e-12):
    assert a.count == b.count
    assert rel(a.mean(), b.mean()) <= tol
    assert rel(a.power_spectrum(0.5), b.power_spectrum(0.5)) <= tol
    assert rel(a.bispectrum(), b.bispectrum()) <= tol
    if a.count >= 2:
        assert rel(a.sigma(), b.sigma()) <= tol


def test_empty_accumulator():
    acc = InvariantAccumulator(5)
    assert acc.count == 0 and acc.sum_means == 0 and acc.sum_sq_dev == 0
    assert not acc.sum_power.any() and not acc.sum_bispec.any()
    for est in (acc.mean, acc.bispectrum, lambda: acc.power_spectrum(1.0)):
        with pytest.raises(ValueError):
            est()


def test_rejects_length_mismatch_and_nonfinite():
    acc = InvariantAccumulator(5)
    with pytest.raises(ValueError):
        acc.add(np.ones(4))
    with pytest.raises(ValueError):
        acc.add([1, 2, np.nan, 4, 5])
    with pytest.raises(ValueError):
        merge(acc, InvariantAccumulator(6))


def test_copies_of_clean_signal_give_exact_invariants(rng):
    x = rng.standard_normal(9)
    acc = accumulate_observations(np.tile(x, (20, 1)))
    assert acc.mean() == pytest.approx(x.mean(), abs=1e-15)
    np.testing.assert_allclose(acc.power_spectrum(0.0), np.abs(np.fft.fft(x)) ** 2, atol=1e-12)
    np.testing.assert_allclose(acc.bispectrum(), signal_bispectrum(x, subtract_mean=True), atol=1e-10)
    assert acc.sigma() == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("s", [0, 1, 4])
def test_single_shifted_observation(rng, s):
    x = rng.standard_normal(7) + 2.0
    acc = accumulate(InvariantAccumulator(7), cyclic_shift(x, s))
    y = np.fft.fft(x - x.mean())
    assert np.abs(acc.bispectrum() - bispectrum(y)).max() <= 1e-10
    assert acc.mean() == pytest.approx(x.mean(), rel=1e-14)


def test_clean_constant_mean():
    acc = accumulate_observations(np.full((3, 6), 2.5))
    assert acc.mean() == 2.5


def test_sigma_needs_two():
    acc = InvariantAccumulator(4).add(np.ones(4))
    with pytest.raises(ValueError):
        acc.sigma()


def test_sigma_zero_when_clean(rng):
    x = rng.standard_normal(41)
    assert accumulate_observations(generate_observations(x, 100, 0.0, 1).observations).sigma() == pytest.approx(0, abs=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("sigma, lo, hi", [(1.0, 0.98, 1.02), (2.0, 1.96, 2.04)])
def test_sigma_estimate(sigma, lo, hi):
    x = generate_gaussian_signal(41, 5)
    acc = accumulate_observations(generate_observations(x, 100_000, sigma, 6).observations)
    assert lo <= acc.sigma() <= hi


@pytest.mark.slow
def test_mean_tail_bound():
    N, M, hits = 41, 10_000, 0
    for t in range(100):
        x = generate_gaussian_signal(N, t)
        acc = accumulate_observations(generate_observations(x, M, 1.0, 500 + t).observations)
        hits += abs(acc.mean() - x.mean()) < 4 / np.sqrt(N * M)
    assert hits >= 99


@pytest.mark.slow
def test_power_spectrum_error_bound():
    N, M, errs = 41, 100_000, []
    for t in range(20):
        x = generate_gaussian_signal(N, t)
        acc = accumulate_observations(generate_observations(x, M, 1.0, 900 + t).observations)
        errs.append(np.abs(acc.power_spectrum(1.0) - np.abs(np.fft.fft(x)) ** 2).max())
    # bound on the 20-trial mean; single trials exceed it often (signal x noise term)
    assert np.mean(errs) < 5 * N / np.sqrt(M)


def test_power_spectrum_symmetric_and_clean(rng):
    x = rng.standard_normal(10)
    acc = accumulate_observations(generate_observations(x, 50, 0.0, 2).observations)
    P = acc.power_spectrum(0.0)
    np.testing.assert_allclose(P, np.abs(np.fft.fft(x)) ** 2, rtol=1e-12)
    noisy = accumulate_observations(generate_observations(x, 50, 1.0, 2).observations).power_spectrum(1.0)
    np.testing.assert_array_equal(noisy[1:], noisy[1:][::-1])


def test_merge_identity_and_commutativity(rng):
    obs = generate_observations(rng.standard_normal(12), 300, 1.0, 4).observations
    a, b = accumulate_observations(obs[:100]), accumulate_observations(obs[100:])
    assert_same_estimates(merge(a, InvariantAccumulator(12)), a, tol=0)
    assert_same_estimates(merge(InvariantAccumulator(12), a), a, tol=0)
    assert_same_estimates(merge(a, b), merge(b, a))


def test_merge_halves_equals_sequential_oracle(rng):
    x = rng.standard_normal(17)
    obs = generate_observations(x, 1000, 1.0, 8).observations
    merged = merge(accumulate_observations(obs[:500]), accumulate_observations(obs[500:]))
    mean, P, B = sequential_estimates(obs, 0.5)
    seq = InvariantAccumulator(17)
    for row in obs:
        seq.add(row)
    assert rel(merged.mean(), mean) <= 1e-12
    assert rel(merged.sigma(), seq.sigma()) <= 1e-12
    assert rel(merged.power_spectrum(0.5), P) <= 1e-12
    assert rel(merged.bispectrum(), B) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=8), st.integers(0, 2**32 - 1))
def test_any_partition_matches_sequential(sizes, seed):
    r = np.random.default_rng(seed)
    obs = r.standard_normal((sum(sizes), 6)) * 3 + 100.0
    cuts = np.cumsum([0] + sizes)
    parts = [accumulate_observations(obs[a:b]) for a, b in zip(cuts[:-1], cuts[1:])]
    seq = InvariantAccumulator(6)
    for row in obs:
        seq.add(row)
    assert_same_estimates(merge_all(parts), seq)


def test_merge_all_empty_list_rejected():
    with pytest.raises(ValueError):
        merge_all([])


def test_raw_bispectrum_bias_formula_shape():
    Bb = bispectrum_noise_bias(2.0, 4, 0.5)
    expected = 4 * 0.25 * 2.0 * (np.eye(4) + np.eye(4)[0][None, :] + np.eye(4)[0][:, None])
    np.testing.assert_allclose(Bb, expected)


def test_raw_bispectrum_clean_equals_signal_bispectrum(rng):
    x = rng.standard_normal(6) + 1
    obs = generate_observations(x, 10, 0.0, 3).observations
    np.testing.assert_allclose(raw_bispectrum_mean(obs), signal_bispectrum(x), atol=1e-10)


def test_storage_independent_of_M(rng):
    small = accumulate_observations(rng.standard_normal((10, 8)))
    big = accumulate_observations(rng.standard_normal((5000, 8)))
    assert small.sum_bispec.nbytes == big.sum_bispec.nbytes and small.sum_power.shape == big.sum_power.shape


@pytest.mark.slow
def test_estimators_converge_in_M():
    N, wins = 41, np.zeros(3)
    for t in range(50):
        x = generate_gaussian_signal(N, t)
        P, B = np.abs(np.fft.fft(x)) ** 2, signal_bispectrum(x, subtract_mean=True)
        obs = generate_observations(x, 100_000, 1.0, 3000 + t).observations
        errs = []
        for M in (100, 100_000):
            a = accumulate_observations(obs[:M])
            errs.append([abs(a.mean() - x.mean()), np.abs(a.power_spectrum(1.0) - P).max(),
                         np.linalg.norm(a.bispectrum() - B)])
        wins += np.array(errs[1]) < np.array(errs[0])
    assert np.all(wins >= 0.95 * 50)


@pytest.mark.slow
def test_error_slopes_in_sigma():
    N, M = 41, 2000
    x = generate_gaussian_signal(N, 0)
    P, B = np.abs(np.fft.fft(x)) ** 2, signal_bispectrum(x, subtract_mean=True)
    sigmas = np.array([2.0, 4.0, 8.0, 16.0])
    E = []
    for s in sigmas:
        e = np.zeros(3)
        for t in range(10):
            a = accumulate_observations(generate_observations(x, M, s, t).observations)
            e += [abs(a.mean() - x.mean()), np.abs(a.power_spectrum(s) - P).max(),
                  np.linalg.norm(a.bispectrum() - B)]
        E.append(e / 10)
    slopes = [np.polyfit(np.log(sigmas), np.log(np.array(E)[:, i]), 1)[0] for i in range(3)]
    np.testing.assert_allclose(slopes, [1, 2, 3], atol=0.5)


def test_estimates_sigma_source(rng):
    acc = accumulate_observations(generate_observations(rng.standard_normal(5), 100, 1.0, 0).observations)
    assert acc.estimates(1.0).sigma_source == "known"
    est = acc.estimates()
    assert est.sigma_source == "estimated" and est.sigma == acc.sigma()


def test_invariants_file_round_trip(tmp_path, rng):
    acc = accumulate_observations(generate_observations(rng.standard_normal(7), 40, 0.8, 1).observations)
    inv = acc.estimates(0.8)
    p = tmp_path / "inv.txt"
    write_invariants(p, inv)
    doc = json.loads(p.read_text())
    assert doc["format"] == "mra-invariants" and len(doc["bispectrum"]) == 7 and len(doc["bispectrum"][0]) == 14
    back = read_invariants(p)
    np.testing.assert_array_equal(back.bispectrum, inv.bispectrum)
    np.testing.assert_array_equal(back.power_spectrum, inv.power_spectrum)
    assert (back.N, back.M, back.sigma, back.mean, back.sigma_source) == (inv.N, inv.M, inv.sigma, inv.mean, inv.sigma_source)


@pytest.mark.parametrize("patch", [{"format": "other"}, {"version": 9}, {"N": 3}])
def test_invariants_file_rejects(tmp_path, rng, patch):
    inv = accumulate_observations(rng.standard_normal((3, 4))).estimates(0.1)
    doc = inv.to_dict()
    doc.update(patch)
    with pytest.raises(ValueError):
        Invariants.from_dict(doc)

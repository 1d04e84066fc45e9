import numpy as np
import pytest

from spectral_mra.signal import relative_error
from spectral_mra.simulate import (MAGIC, ObservationSet, generate_gaussian_signal, generate_observations,
                                   known_shift_oracle, observation_row, random_phases, read_observations,
                                   write_observations)


def test_signal_determinism():
    np.testing.assert_array_equal(generate_gaussian_signal(41, 7), generate_gaussian_signal(41, 7))
    assert np.any(generate_gaussian_signal(41, 7) != generate_gaussian_signal(41, 8))


def test_random_phases():
    z = random_phases(12, 3)
    assert z[0] == 1
    np.testing.assert_allclose(np.abs(z), 1)


def test_clean_rows_are_shifts(rng):
    x = rng.standard_normal(11)
    obs = generate_observations(x, 3, 0.0, 5)
    for row in obs.observations:
        assert relative_error(x, row)[0] == 0.0


def test_rejects_bad_arguments(rng):
    x = rng.standard_normal(5)
    with pytest.raises(ValueError):
        generate_observations(x, 0, 1.0, 0)
    with pytest.raises(ValueError):
        generate_observations(x, 3, -1.0, 0)


@pytest.mark.parametrize("chunk", [1, 7, 1000])
def test_chunk_invariant_and_rows_reproducible(rng, chunk):
    x = rng.standard_normal(13)
    ref = generate_observations(x, 50, 0.7, 99)
    obs = generate_observations(x, 50, 0.7, 99, chunk=chunk)
    np.testing.assert_array_equal(obs.observations, ref.observations)
    for j in (0, 17, 49):
        row, s = observation_row(x, j, 0.7, 99)
        np.testing.assert_array_equal(row, ref.observations[j])
        assert s == ref.true_shifts[j]


def test_prefix_nesting(rng):
    x = rng.standard_normal(8)
    small = generate_observations(x, 20, 1.0, 3)
    big = generate_observations(x, 200, 1.0, 3)
    np.testing.assert_array_equal(big.observations[:20], small.observations)


def test_shifts_uniform():
    obs = generate_observations(np.arange(8.0), 80_000, 0.0, 1)
    counts = np.bincount(obs.true_shifts, minlength=8)
    assert np.all(np.abs(counts - 10_000) < 5 * np.sqrt(10_000))


@pytest.mark.slow
def test_noise_variance_and_whiteness():
    N, M = 41, 100_000
    x = generate_gaussian_signal(N, 0)
    obs = generate_observations(x, M, 1.0, 1)
    idx = (np.arange(N)[None, :] + obs.true_shifts[:, None]) % N
    eps = obs.observations - x[idx]
    assert 0.99 < eps.var(ddof=1) < 1.01
    # per-column variances: standardized deviations should look like N(0, 1) draws
    z = (eps.var(axis=0, ddof=1) - 1) / np.sqrt(2 / (M - 1))
    assert np.abs(z).max() < 4.5
    assert (z**2).sum() < 80  # chi2(41) upper 0.1% point is ~74.7
    flat = eps.ravel()
    r = np.array([np.mean(flat[:-l] * flat[l:]) for l in range(1, 50)])
    assert np.mean(np.abs(r) < 4 / np.sqrt(M * N)) >= 0.99


def test_oracle_examples(rng):
    x = rng.standard_normal(6)
    np.testing.assert_allclose(known_shift_oracle(generate_observations(x, 30, 0.0, 2)), x, atol=1e-15)
    one = ObservationSet(x[None, :], 0.0, np.array([0]))
    np.testing.assert_array_equal(known_shift_oracle(one), x)
    with pytest.raises(ValueError):
        known_shift_oracle(ObservationSet(x[None, :], 0.0))


@pytest.mark.slow
def test_oracle_error_scale():
    N, M, ratios = 41, 10_000, []
    for t in range(50):
        x = generate_gaussian_signal(N, 1000 + t)
        err = relative_error(x, known_shift_oracle(generate_observations(x, M, 1.0, t)))[0]
        ratios.append(err / (np.sqrt(N / M) / np.linalg.norm(x)))
    assert 0.5 < np.mean(ratios) < 2


def test_oracle_error_decreases_with_M():
    means = []
    for M in (100, 1000, 10_000):
        errs = []
        for t in range(20):
            x = generate_gaussian_signal(41, t)
            errs.append(relative_error(x, known_shift_oracle(generate_observations(x, M, 1.0, t)))[0])
        means.append(np.mean(errs))
    assert means[0] > means[1] > means[2]


def test_file_round_trip(tmp_path, rng):
    obs = generate_observations(rng.standard_normal(7), 25, 0.3, 11)
    p = tmp_path / "o.mra"
    write_observations(p, obs)
    raw = p.read_bytes()
    assert raw[:4] == MAGIC and len(raw) == 4 + 2 + 4 + 8 + 8 + 1 + 25 * 7 * 8 + 25 * 4
    back = read_observations(p)
    np.testing.assert_array_equal(back.observations, obs.observations)
    np.testing.assert_array_equal(back.true_shifts, obs.true_shifts)
    assert back.sigma == obs.sigma
    bare = ObservationSet(obs.observations, 0.3)
    write_observations(p, bare)
    assert read_observations(p).true_shifts is None


@pytest.mark.parametrize("mutate", [lambda b: b"XXXX" + b[4:], lambda b: b[:-1], lambda b: b + b"\0",
                                    lambda b: b[:4] + b"\x02\x00" + b[6:]])
def test_file_rejects_corruption(tmp_path, rng, mutate):
    p = tmp_path / "o.mra"
    write_observations(p, generate_observations(rng.standard_normal(4), 3, 0.1, 0))
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(ValueError):
        read_observations(p)

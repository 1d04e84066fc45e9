"""Slow, obviously-correct reference computations used to cross-check the fast paths."""

import numpy as np


def dft_direct(x):
    """O(N^2) summation of the forward DFT."""
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    out = np.zeros(n, dtype=np.complex128)
    for k in range(n):
        for j in range(n):
            out[k] += x[j] * np.exp(-2j * np.pi * j * k / n)
    return out


def bispectrum_triple_product(y):
    """Entry-by-entry ``y[k1] conj(y[k2]) y[(k2 - k1) mod N]``."""
    y = np.asarray(y, dtype=np.complex128)
    n = y.shape[0]
    B = np.empty((n, n), dtype=np.complex128)
    for k1 in range(n):
        for k2 in range(n):
            B[k1, k2] = y[k1] * np.conj(y[k2]) * y[(k2 - k1) % n]
    return B


def relative_error_exhaustive(truth, estimate):
    """Evaluate every cyclic shift; returns ``(error, first minimizing shift)``."""
    x = np.asarray(truth, dtype=np.float64)
    xh = np.asarray(estimate, dtype=np.float64)
    nx = np.linalg.norm(x)
    errs = [np.linalg.norm(np.roll(xh, -s) - x) / nx for s in range(x.shape[0])]
    s = int(np.argmin(errs))
    return float(errs[s]), s


def sequential_estimates(observations, sigma):
    """Plain-loop estimates of mean, power spectrum and mean-subtracted bispectrum."""
    obs = np.asarray(observations, dtype=np.float64)
    m, n = obs.shape
    mean = 0.0
    power = np.zeros(n)
    B = np.zeros((n, n), dtype=np.complex128)
    for row in obs:
        mean += row.mean()
        power += np.abs(dft_direct(row)) ** 2
        B += bispectrum_triple_product(dft_direct(row - row.mean()))
    return mean / m, power / m - n * sigma**2, B / m

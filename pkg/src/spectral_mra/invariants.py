"""One-pass, mergeable estimation of the shift-invariant features.

An :class:`InvariantAccumulator` keeps O(N^2) running sums regardless of how
many observations pass through it. Shards of an observation set can be
accumulated independently and combined with :func:`merge`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

INVARIANTS_FORMAT = "mra-invariants"
INVARIANTS_VERSION = 1


@dataclass
class InvariantAccumulator:
    N: int
    count: int = 0
    sum_means: float = 0.0
    # centred second moment of the per-observation sums (Chan/Welford form)
    sum_sq_dev: float = 0.0
    sum_power: np.ndarray = field(default=None)
    sum_bispec: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"N must be >= 2, got {self.N}")
        if self.sum_power is None:
            self.sum_power = np.zeros(self.N)
        if self.sum_bispec is None:
            self.sum_bispec = np.zeros((self.N, self.N), dtype=np.complex128)

    def copy(self) -> "InvariantAccumulator":
        return InvariantAccumulator(self.N, self.count, self.sum_means, self.sum_sq_dev,
                                    self.sum_power.copy(), self.sum_bispec.copy())

    def add(self, row) -> "InvariantAccumulator":
        """Accumulate one observation in place; returns ``self``."""
        return self.add_batch(np.asarray(row, dtype=np.float64)[None, :])

    def add_batch(self, rows) -> "InvariantAccumulator":
        """Accumulate a block of observations (one per row) in place; returns ``self``."""
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.N:
            raise ValueError(f"expected observations of length {self.N}, got shape {rows.shape}")
        if rows.shape[0] == 0:
            return self
        if not np.all(np.isfinite(rows)):
            raise ValueError("observations contain non-finite samples")
        H = np.fft.rfft(rows, axis=1)
        sums = H[:, 0].real
        half_power = np.zeros(H.shape[1])
        kernels.accumulate_spectra(H, self.N, half_power, self.sum_bispec)
        self.sum_power += half_power[np.minimum(np.arange(self.N), self.N - np.arange(self.N))]
        batch = (rows.shape[0], float(sums.sum()) / self.N, float(np.sum((sums - sums.mean()) ** 2)))
        self.count, self.sum_means, self.sum_sq_dev = _combine_moments(self._moments(), batch, self.N)
        return self

    def _moments(self):
        return self.count, self.sum_means, self.sum_sq_dev

    # -- estimators ---------------------------------------------------------

    def _require(self, n):
        if self.count < n:
            raise ValueError(f"need at least {n} accumulated observation(s), have {self.count}")

    def mean(self) -> float:
        """Average of the per-observation sample means."""
        self._require(1)
        return self.sum_means / self.count

    def sigma(self) -> float:
        """Noise level from the spread of per-observation sums, ``sqrt(Var_j(sum_n xi_j[n]) / N)``."""
        self._require(2)
        return float(np.sqrt(max(self.sum_sq_dev, 0.0) / (self.count - 1) / self.N))

    def power_spectrum(self, sigma: float) -> np.ndarray:
        """Bias-corrected power spectrum ``mean_j |DFT(xi_j)|^2 - N sigma^2``, symmetrized.

        Entries may be negative; clamping is left to reconstruction.
        """
        self._require(1)
        if sigma < 0:
            raise ValueError("sigma must be nonnegative")
        P = self.sum_power / self.count - self.N * sigma**2
        return 0.5 * (P + np.roll(P[::-1], 1))

    def bispectrum(self) -> np.ndarray:
        """Average bispectrum of the mean-subtracted observations."""
        self._require(1)
        return self.sum_bispec / self.count

    def estimates(self, sigma: float | None = None) -> "Invariants":
        """Bundle the three features; ``sigma=None`` uses :meth:`sigma`."""
        source = "known"
        if sigma is None:
            sigma, source = self.sigma(), "estimated"
        return Invariants(self.N, self.count, float(sigma), self.mean(),
                          self.power_spectrum(sigma), self.bispectrum(), source)


def _combine_moments(a, b, N):
    """Chan et al. pairwise update of (count, sum of means, centred M2 of sums)."""
    na, sa, m2a = a
    nb, sb, m2b = b
    if na == 0:
        return b
    if nb == 0:
        return a
    n = na + nb
    delta = sb * N / nb - sa * N / na
    return n, sa + sb, m2a + m2b + delta * delta * (na * nb / n)


def accumulate(acc: InvariantAccumulator, row) -> InvariantAccumulator:
    """Functional form of :meth:`InvariantAccumulator.add`; ``acc`` is left untouched."""
    return acc.copy().add(row)


def merge(a: InvariantAccumulator, b: InvariantAccumulator) -> InvariantAccumulator:
    if a.N != b.N:
        raise ValueError(f"cannot merge accumulators of length {a.N} and {b.N}")
    count, sum_means, m2 = _combine_moments(a._moments(), b._moments(), a.N)
    return InvariantAccumulator(a.N, count, sum_means, m2,
                                a.sum_power + b.sum_power, a.sum_bispec + b.sum_bispec)


def merge_all(accs) -> InvariantAccumulator:
    """Pairwise tree reduction, so rounding does not depend on a left fold's depth."""
    accs = list(accs)
    if not accs:
        raise ValueError("nothing to merge")
    while len(accs) > 1:
        nxt = [merge(accs[i], accs[i + 1]) for i in range(0, len(accs) - 1, 2)]
        if len(accs) % 2:
            nxt.append(accs[-1])
        accs = nxt
    return accs[0]


def accumulate_observations(observations, chunk: int = 4096) -> InvariantAccumulator:
    obs = np.asarray(observations, dtype=np.float64)
    acc = InvariantAccumulator(obs.shape[1])
    for start in range(0, obs.shape[0], chunk):
        acc.add_batch(obs[start:start + chunk])
    return acc


# -- bias diagnostics -------------------------------------------------------

def raw_bispectrum_mean(observations) -> np.ndarray:
    """Average bispectrum WITHOUT per-observation mean removal (biased; diagnostic only)."""
    obs = np.asarray(observations, dtype=np.float64)
    n = obs.shape[1]
    out = np.zeros((n, n), dtype=np.complex128)
    H = np.fft.rfft(obs, axis=1)
    kernels.accumulate_spectra(H, n, np.zeros(H.shape[1]), out, zero_dc=False)
    return out / obs.shape[0]


def bispectrum_noise_bias(dc: float, N: int, sigma: float) -> np.ndarray:
    """Expected excess of a raw noisy bispectrum over the clean one.

    ``N sigma^2 y[0] (delta(k1, k2) + delta(k1, 0) + delta(k2, 0))`` where ``dc = y[0]``.
    """
    bias = np.eye(N)
    bias[0, :] += 1.0
    bias[:, 0] += 1.0
    return N * sigma**2 * dc * bias


# -- invariants file ------------------------------------------------------------

@dataclass
class Invariants:
    N: int
    M: int
    sigma: float
    mean: float
    power_spectrum: np.ndarray
    bispectrum: np.ndarray
    sigma_source: str = "known"

    def to_dict(self) -> dict:
        B = self.bispectrum
        rows = [np.column_stack([r.real, r.imag]).ravel().tolist() for r in B]
        return {
            "format": INVARIANTS_FORMAT,
            "version": INVARIANTS_VERSION,
            "N": int(self.N),
            "M": int(self.M),
            "sigma": float(self.sigma),
            "sigma_source": self.sigma_source,
            "mean": float(self.mean),
            "power_spectrum": [float(v) for v in self.power_spectrum],
            "bispectrum": rows,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Invariants":
        if d.get("format") != INVARIANTS_FORMAT:
            raise ValueError(f"not an invariants document (format={d.get('format')!r})")
        if d.get("version") != INVARIANTS_VERSION:
            raise ValueError(f"unsupported invariants version {d.get('version')!r}")
        N = int(d["N"])
        P = np.asarray(d["power_spectrum"], dtype=np.float64)
        flat = np.asarray(d["bispectrum"], dtype=np.float64)
        if P.shape != (N,) or flat.shape != (N, 2 * N):
            raise ValueError("invariants document has inconsistent dimensions")
        B = flat[:, 0::2] + 1j * flat[:, 1::2]
        return cls(N, int(d["M"]), float(d["sigma"]), float(d["mean"]), P, B,
                   d.get("sigma_source", "known"))


def write_invariants(path, inv: Invariants) -> None:
    Path(path).write_text(json.dumps(inv.to_dict(), indent=1) + "\n")


def read_invariants(path) -> Invariants:
    return Invariants.from_dict(json.loads(Path(path).read_text()))

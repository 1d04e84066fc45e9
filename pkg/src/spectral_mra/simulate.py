"""Synthetic observation sets: noisy, randomly cyclically shifted copies of a signal.

Randomness comes from counter-based Philox streams. Observation ``j`` reads a
fixed window of the stream (one uniform for its shift, ``N`` for its noise), so
any row can be regenerated alone and chunked generation is bit-identical to a
single pass.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .signal import as_signal

_STREAM_SIGNAL = 1
_STREAM_OBSERVATIONS = 2
_STREAM_INIT = 3

MAGIC = b"MRA1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIQdB")
_FLAG_SHIFTS = 0x01


def philox(seed: int, stream: int) -> np.random.Philox:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Philox(key=(stream << 64) | seed)


@dataclass(frozen=True)
class ObservationSet:
    observations: np.ndarray  # (M, N), row j is one noisy shifted copy
    sigma: float
    true_shifts: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=np.float64)
        if obs.ndim != 2 or obs.shape[0] < 1 or obs.shape[1] < 2:
            raise ValueError(f"observations must be an (M >= 1, N >= 2) array, got {obs.shape}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        object.__setattr__(self, "observations", obs)
        if self.true_shifts is not None:
            shifts = np.asarray(self.true_shifts, dtype=np.int64)
            if shifts.shape != (obs.shape[0],):
                raise ValueError("true_shifts must have one entry per observation")
            if np.any((shifts < 0) | (shifts >= obs.shape[1])):
                raise ValueError("true_shifts must lie in [0, N)")
            object.__setattr__(self, "true_shifts", shifts)

    @property
    def M(self) -> int:
        return self.observations.shape[0]

    @property
    def N(self) -> int:
        return self.observations.shape[1]


def generate_gaussian_signal(N: int, seed: int) -> np.ndarray:
    """N i.i.d. standard normal samples, reproducible per seed."""
    if N < 2:
        raise ValueError(f"signal length must be >= 2, got {N}")
    return np.random.Generator(philox(seed, _STREAM_SIGNAL)).standard_normal(N)


def random_phases(N: int, seed: int) -> np.ndarray:
    """Uniform random unit phases with entry 0 fixed to 1 (random initial guesses)."""
    ang = np.random.Generator(philox(seed, _STREAM_INIT)).uniform(0.0, 2 * np.pi, N)
    z = np.exp(1j * ang)
    z[0] = 1.0
    return z


def _draw_rows(seed: int, N: int, start: int, stop: int):
    # each observation owns ceil((N + 1) / 4) Philox counter blocks of 4 doubles
    blocks = -(-(N + 1) // 4)
    width = 4 * blocks
    bg = philox(seed, _STREAM_OBSERVATIONS).advance(start * blocks)
    u = np.random.Generator(bg).random((stop - start) * width).reshape(stop - start, width)
    shifts = np.floor(u[:, 0] * N).astype(np.int64)
    # random() is k * 2**-53; the half-step offset keeps ndtri finite
    noise = ndtri(u[:, 1:N + 1] + 2.0**-54)
    return shifts, noise


def generate_observations(x, M: int, sigma: float, seed: int, chunk: int = 8192) -> ObservationSet:
    """Draw ``xi_j = R_{s_j} x + sigma * eps_j`` with uniform shifts and standard normal noise."""
    x = as_signal(x)
    if M < 1:
        raise ValueError(f"need at least one observation, got M={M}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    N = x.shape[0]
    obs = np.empty((M, N))
    shifts = np.empty(M, dtype=np.int64)
    cols = np.arange(N)
    for start in range(0, M, chunk):
        stop = min(M, start + chunk)
        s, noise = _draw_rows(seed, N, start, stop)
        obs[start:stop] = x[(cols[None, :] + s[:, None]) % N] + sigma * noise
        shifts[start:stop] = s
    return ObservationSet(obs, float(sigma), shifts, int(seed))


def observation_row(x, j: int, sigma: float, seed: int) -> tuple[np.ndarray, int]:
    """Regenerate observation ``j`` alone; matches row ``j`` of :func:`generate_observations`."""
    x = as_signal(x)
    s, noise = _draw_rows(seed, x.shape[0], j, j + 1)
    return np.roll(x, -int(s[0])) + sigma * noise[0], int(s[0])


def known_shift_oracle(obs: ObservationSet) -> np.ndarray:
    """Undo every true shift and average: ``(1/M) sum_j R_{-s_j} xi_j``."""
    if obs.true_shifts is None:
        raise ValueError("the known-shift oracle needs the true shifts")
    N = obs.N
    idx = (np.arange(N)[None, :] - obs.true_shifts[:, None]) % N
    return np.take_along_axis(obs.observations, idx, axis=1).mean(axis=0)


def write_observations(path, obs: ObservationSet) -> None:
    flags = _FLAG_SHIFTS if obs.true_shifts is not None else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, obs.N, obs.M, obs.sigma, flags))
        fh.write(np.ascontiguousarray(obs.observations, dtype="<f8").tobytes())
        if flags & _FLAG_SHIFTS:
            fh.write(obs.true_shifts.astype("<u4").tobytes())


def read_observations(path) -> ObservationSet:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, N, M, sigma, flags = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: not an observation file (magic {magic!r})")
    if version != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    off = _HEADER.size
    expected = off + 8 * M * N + (4 * M if flags & _FLAG_SHIFTS else 0)
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    obs = np.frombuffer(data, dtype="<f8", count=M * N, offset=off).reshape(M, N).astype(np.float64)
    shifts = None
    if flags & _FLAG_SHIFTS:
        shifts = np.frombuffer(data, dtype="<u4", count=M, offset=off + 8 * M * N).astype(np.int64)
    return ObservationSet(obs, sigma, shifts)

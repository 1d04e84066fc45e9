"""Combine mean, power spectrum and phases into a signal estimate."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .signal import relative_error

REALNESS_RTOL = 1e-6


@dataclass
class ReconstructionResult:
    x_hat: np.ndarray
    y_hat: np.ndarray
    method: str = ""
    rel_error: float | None = None
    aligning_shift: int | None = None
    diagnostics: dict = field(default_factory=dict)


def assemble(mean_hat: float, power_hat, phases, method: str = "") -> ReconstructionResult:
    """Build ``y_hat[0] = N * mean_hat`` and ``y_hat[k] = sqrt(max(P[k], 0)) * phases[k]``.

    The power spectrum at k=0 is ignored; the DC term comes from the mean.
    Conjugate symmetry is imposed before the inverse DFT.
    """
    P = np.asarray(power_hat, dtype=np.float64)
    z = np.asarray(phases, dtype=np.complex128)
    N = P.shape[0]
    if z.shape != (N,) or N < 2:
        raise ValueError(f"power spectrum and phases must both have length N >= 2 ({P.shape}, {z.shape})")
    if not (np.isfinite(mean_hat) and np.all(np.isfinite(P)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite input to assemble")
    if abs(z[0] - 1) > 1e-8:
        raise ValueError(f"phases[0] must be 1, got {z[0]}")
    clamped = int(np.count_nonzero(P[1:] < 0))
    y = np.sqrt(np.maximum(P, 0.0)) * z
    y[0] = N * mean_hat
    mirror = np.conj(np.roll(y[::-1], 1))
    y[1:] = 0.5 * (y[1:] + mirror[1:])
    xc = np.fft.ifft(y)
    xr = xc.real
    resid = np.linalg.norm(xc.imag)
    if resid > REALNESS_RTOL * max(np.linalg.norm(xr), 1e-300):
        raise ArithmeticError(f"inverse DFT left an imaginary residue of {resid:.3e}")
    return ReconstructionResult(xr, y, method, diagnostics={"clamped_bins": clamped})


def evaluate(result: ReconstructionResult, truth) -> ReconstructionResult:
    """Fill in the shift-aligned relative error against ``truth``."""
    err, s = relative_error(truth, result.x_hat)
    result.rel_error = err
    result.aligning_shift = s
    return result


def write_signal(path, x) -> None:
    Path(path).write_text("".join(f"{float(v)!r}\n" for v in np.asarray(x, dtype=np.float64)))


def read_signal(path) -> np.ndarray:
    vals = [float(line) for line in Path(path).read_text().split() if line.strip()]
    return np.asarray(vals, dtype=np.float64)

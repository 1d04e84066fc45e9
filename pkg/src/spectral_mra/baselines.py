"""Comparison phase inverters: frequency marching and iterative phase synchronization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .signal import circulant_index, phase_array

SYNC_MAX_ITERS = 15
SYNC_TOL = 1e-8


class DegenerateFrequencyError(ValueError):
    def __init__(self, k):
        super().__init__(f"frequency marching sum vanished at frequency k={k}")
        self.k = k


def frequency_marching(Bt) -> np.ndarray:
    """Fill phases upward from frequency 1 using ``Bt[k1, k] = u[k1] conj(u[k]) u[k - k1]``.

    Each ``u[k]`` averages the ``floor(k/2)`` redundant estimates
    ``u[k1] u[k-k1] conj(Bt[k1, k])`` before projecting to unit modulus, and
    the upper half follows by conjugate symmetry. Fixing ``u[1] = 1`` leaves
    a continuous phase ramp undetermined; it is pinned afterwards from the
    wrap-around entries (``k2 < k1``), which only a whole-sample shift leaves
    unchanged. O(N^2).
    """
    Bt = np.ascontiguousarray(Bt, dtype=np.complex128)
    if Bt.ndim != 2 or Bt.shape[0] != Bt.shape[1] or Bt.shape[0] < 2:
        raise ValueError(f"expected a square matrix of size >= 2, got {Bt.shape}")
    z, bad = kernels.frequency_marching(Bt)
    if bad >= 0:
        raise DegenerateFrequencyError(int(bad))
    return z


@dataclass
class SynchronizationTrace:
    iterates: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    converged_at: int | None = None

    @property
    def iterations(self) -> int:
        return len(self.residuals)


def iterative_phase_synchronization(Bt, init, max_iters: int = SYNC_MAX_ITERS,
                                    tol: float = SYNC_TOL, keep_iterates: bool = True):
    """Fixed-point iteration ``z <- phase((Bt o conj(C(z))) z)`` with ``z[0]`` pinned to 1.

    Stops once ``||z_next - z|| < tol`` (``converged_at`` records that
    iteration count) or after ``max_iters`` updates.

    Returns
    -------
    z : ndarray
        Final phase estimate.
    trace : SynchronizationTrace
    """
    Bt = np.asarray(Bt, dtype=np.complex128)
    z = np.array(init, dtype=np.complex128)
    n = Bt.shape[0]
    if Bt.shape != (n, n) or z.shape != (n,):
        raise ValueError("init must match the bispectrum dimension")
    if max_iters < 1 or tol <= 0:
        raise ValueError("max_iters must be >= 1 and tol > 0")
    if not np.allclose(np.abs(z), 1.0, atol=1e-10) or abs(z[0] - 1) > 1e-10:
        raise ValueError("init must have unit-modulus entries with init[0] == 1")
    idx = circulant_index(n)
    trace = SynchronizationTrace(iterates=[z.copy()] if keep_iterates else [])
    for it in range(1, max_iters + 1):
        z_next = phase_array((Bt * np.conj(z[idx])) @ z)
        z_next[0] = 1.0
        res = float(np.linalg.norm(z_next - z))
        trace.residuals.append(res)
        if keep_iterates:
            trace.iterates.append(z_next.copy())
        z = z_next
        if res < tol:
            trace.converged_at = it
            break
    return z, trace

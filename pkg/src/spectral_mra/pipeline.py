"""End-to-end inversion: invariants -> phases -> signal estimate."""

from __future__ import annotations

import time

import numpy as np

from .baselines import SYNC_MAX_ITERS, SYNC_TOL, frequency_marching, iterative_phase_synchronization
from .invariants import Invariants
from .reconstruct import ReconstructionResult, assemble
from .signal import bispectrum, normalize_bispectrum
from .simulate import random_phases
from .spectral import spectral_phase_recovery, symmetrize_phases

INVERSION_METHODS = ("spectral", "fm", "phase-sync-random", "phase-sync-spectral")


def invert(inv: Invariants, method: str = "spectral", *, enforce_symmetry: bool = True,
           sync_max_iters: int = SYNC_MAX_ITERS, sync_tol: float = SYNC_TOL,
           init_seed: int = 0, solver: str = "jacobi") -> ReconstructionResult:
    """Recover a signal from estimated invariants with one of :data:`INVERSION_METHODS`.

    ``diagnostics`` carries ``time_invert_s`` and, where they apply,
    ``selected_index``, ``selected_gap`` and ``iterations``.
    """
    if method not in INVERSION_METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(INVERSION_METHODS)}")
    t0 = time.perf_counter()
    Bt = normalize_bispectrum(inv.bispectrum)
    diag = {}
    if method == "fm":
        z = frequency_marching(Bt)
    elif method == "phase-sync-random":
        z, trace = iterative_phase_synchronization(
            Bt, random_phases(inv.N, init_seed), sync_max_iters, sync_tol, keep_iterates=False)
        diag["iterations"] = trace.iterations
        diag["converged"] = trace.converged_at is not None
    else:
        z, eig = spectral_phase_recovery(Bt, enforce_symmetry=enforce_symmetry,
                                         solver=solver, return_selection=True)
        diag["selected_index"] = eig.selected_index
        diag["selected_gap"] = eig.selected_gap
        diag["eig_sweeps"] = eig.sweeps
        if method == "phase-sync-spectral":
            z, trace = iterative_phase_synchronization(Bt, z, sync_max_iters, sync_tol,
                                                       keep_iterates=False)
            diag["iterations"] = trace.iterations
            diag["converged"] = trace.converged_at is not None
    if enforce_symmetry and method.startswith("phase-sync"):
        z = symmetrize_phases(z)
    result = assemble(inv.mean, inv.power_spectrum, z, method=method)
    result.diagnostics.update(diag)
    result.diagnostics["time_invert_s"] = time.perf_counter() - t0
    return result


def clean_invariants(x) -> Invariants:
    """Exact invariants of a signal (what infinitely many noiseless observations converge to)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.fft.fft(x - x.mean())
    y[0] = 0.0
    return Invariants(x.shape[0], 0, 0.0, float(x.mean()), np.abs(np.fft.fft(x)) ** 2, bispectrum(y))

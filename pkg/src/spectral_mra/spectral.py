"""Fourier-phase recovery from the normalized bispectrum by eigendecomposition.

For a clean mean-subtracted signal with phases ``u``, the normalized bispectrum
is ``(u u^*) o C(u)`` and is diagonalized by ``diag(u) F``; every eigenvector
therefore carries ``u`` up to an integer phase ramp (a cyclic shift). With
noise, the eigenvector whose eigenvalue is best isolated from its neighbours is
the most trustworthy, so that one is used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .signal import ZERO_PHASE_RTOL, phase_array

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


class EigenConvergenceError(RuntimeError):
    pass


class DegeneratePivotError(ValueError):
    """The selected eigenvector has (numerically) no weight at frequency 0."""


@dataclass
class EigenSelection:
    eigenvalues: np.ndarray       # descending
    eigenvectors: np.ndarray      # column i pairs with eigenvalues[i]
    gaps: np.ndarray | None = None
    selected_index: int | None = None  # 0-based column of the chosen eigenvector
    sort_permutation: np.ndarray | None = None
    sweeps: int = 0
    pivot_fallback: bool = False

    @property
    def selected_gap(self) -> float:
        return float(self.gaps[self.selected_index])


def hermitian_eig(Bt, solver: str = "jacobi") -> EigenSelection:
    """Eigendecomposition ``Bt = U diag(lam) U^*`` with ``lam`` sorted descending.

    ``solver`` is ``"jacobi"`` (the package kernel) or ``"lapack"``
    (``numpy.linalg.eigh``, for cross-checking).
    """
    Bt = np.ascontiguousarray(Bt, dtype=np.complex128)
    if Bt.ndim != 2 or Bt.shape[0] != Bt.shape[1] or Bt.shape[0] < 2:
        raise ValueError(f"expected a square matrix of size >= 2, got {Bt.shape}")
    sweeps = 0
    if solver == "jacobi":
        w, U, sweeps, off = kernels.jacobi_eigh(Bt, JACOBI_TOL, JACOBI_MAX_SWEEPS)
        if sweeps < 0:
            raise EigenConvergenceError(
                f"Jacobi did not converge in {-sweeps} sweeps "
                f"(off-diagonal norm {off:.3e}, matrix norm {np.linalg.norm(Bt):.3e})")
    elif solver == "lapack":
        w, U = np.linalg.eigh(Bt)
    else:
        raise ValueError(f"unknown eigensolver {solver!r}")
    order = np.argsort(-w, kind="stable")
    return EigenSelection(np.asarray(w)[order], np.asarray(U)[:, order],
                          sort_permutation=order, sweeps=abs(int(sweeps)))


def spectral_gaps(eigenvalues) -> np.ndarray:
    """Distance from each eigenvalue to its nearest sorted neighbour (end points: one neighbour)."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.ndim != 1 or lam.shape[0] < 2:
        raise ValueError("need at least two eigenvalues")
    d = lam[:-1] - lam[1:]
    if np.any(d < 0):
        raise ValueError("eigenvalues must be sorted in descending order")
    gaps = np.empty_like(lam)
    gaps[0] = d[0]
    gaps[-1] = d[-1]
    gaps[1:-1] = np.minimum(d[:-1], d[1:])
    return gaps


def symmetrize_phases(z) -> np.ndarray:
    """Project onto conjugate-symmetric unit phases: ``z[k] <- phase(z[k] + conj(z[N-k]))``."""
    z = np.asarray(z, dtype=np.complex128)
    mirror = np.conj(np.roll(z[::-1], 1))
    out = phase_array(z + mirror)
    out[0] = 1.0
    return out


def select_eigenvector(eig: EigenSelection, strict_pivot: bool = False) -> np.ndarray:
    """Pick the max-gap eigenvector and turn it into unit phases with entry 0 equal to 1.

    Ties in the gap go to the larger ``|eigenvalue|``, then to the smaller
    index. If the chosen vector has no weight at index 0, it is normalized by
    its largest entry instead (``strict_pivot=True`` raises).
    """
    lam = eig.eigenvalues
    if eig.gaps is None:
        eig.gaps = spectral_gaps(lam)
    gaps = eig.gaps
    best = np.flatnonzero(gaps == gaps.max())
    if best.size > 1:
        mags = np.abs(lam[best])
        best = best[mags == mags.max()]
    i = int(best[0])
    eig.selected_index = i
    v = eig.eigenvectors[:, i]
    vmax = np.abs(v).max()
    if abs(v[0]) > ZERO_PHASE_RTOL * vmax:
        eig.pivot_fallback = False
        z = phase_array(v / v[0])
    else:
        if strict_pivot:
            raise DegeneratePivotError(
                f"eigenvector {i} has |v[0]| = {abs(v[0]):.3e} relative to max {vmax:.3e}")
        eig.pivot_fallback = True
        z = phase_array(v / v[np.argmax(np.abs(v))])
        z = z * np.conj(z[0])
    z[0] = 1.0
    return z


def spectral_phase_recovery(Bt, enforce_symmetry: bool = True, solver: str = "jacobi",
                            return_selection: bool = False):
    """Recover unit Fourier phases from a normalized bispectrum.

    Parameters
    ----------
    Bt : (N, N) complex array
        Hermitian normalized bispectrum.
    enforce_symmetry : bool
        Project the result onto conjugate-symmetric phases (true for real
        signals). Turn off to get the eigenvector phases exactly as selected.
    solver : {"jacobi", "lapack"}
    return_selection : bool
        Also return the :class:`EigenSelection` with gaps and the chosen index.
    """
    eig = hermitian_eig(Bt, solver=solver)
    eig.gaps = spectral_gaps(eig.eigenvalues)
    z = select_eigenvector(eig)
    if enforce_symmetry:
        z = symmetrize_phases(z)
    return (z, eig) if return_selection else z

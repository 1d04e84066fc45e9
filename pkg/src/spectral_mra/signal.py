"""Signal algebra on length-N periodic signals.

Conventions: the forward DFT is unnormalized, ``y[k] = sum_n x[n] exp(-2j pi n k / N)``,
and the inverse carries the 1/N factor. A cyclic shift by ``s`` maps
``x[n] -> x[(n + s) mod N]``. All indices are reduced modulo N.
"""

from __future__ import annotations

import numpy as np

#: relative threshold below which a complex value is treated as zero by :func:`phase`
ZERO_PHASE_RTOL = 1e-12

#: relative Frobenius tolerance for accepting a matrix as Hermitian
HERMITIAN_RTOL = 1e-6


class NotHermitianError(ValueError):
    """A bispectrum estimate that should be Hermitian is not, beyond tolerance."""


def as_signal(x, name="signal") -> np.ndarray:
    """Validate and return ``x`` as a 1-D float64 array of length >= 2."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError(f"{name} must have length N >= 2, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite samples")
    return arr


def dft(x) -> np.ndarray:
    return np.fft.fft(as_signal(x))


def idft(y) -> np.ndarray:
    """Inverse of :func:`dft`; returns complex values (callers take the real part)."""
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.shape[0] < 2:
        raise ValueError("Fourier coefficients must be a 1-D sequence of length >= 2")
    return np.fft.ifft(y)


def cyclic_shift(x, s: int) -> np.ndarray:
    """``out[n] = x[(n + s) mod N]``."""
    x = as_signal(x)
    return np.roll(x, -(int(s) % x.shape[0]))


def phase(z: complex) -> complex:
    """Unit-modulus phase of a scalar, with ``phase(0) == 1``."""
    z = complex(z)
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"phase of non-finite value {z!r}")
    mag = abs(z)
    if mag <= ZERO_PHASE_RTOL:
        return 1.0 + 0j
    return z / mag


def phase_array(z) -> np.ndarray:
    """Entrywise phase. Entries with modulus at most ``1e-12 * max|z|`` map to 1."""
    z = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(z)):
        raise ValueError("phase of non-finite values")
    mag = np.abs(z)
    scale = mag.max() if mag.size else 0.0
    tiny = mag <= ZERO_PHASE_RTOL * (scale if scale > 0 else 1.0)
    out = np.ones_like(z)
    np.divide(z, mag, out=out, where=~tiny)
    return out


def circulant(first_row) -> np.ndarray:
    """``C[k1, k2] = first_row[(k2 - k1) mod N]``."""
    z = np.asarray(first_row)
    if z.ndim != 1 or z.shape[0] < 2:
        raise ValueError("circulant needs a 1-D first row of length >= 2")
    n = z.shape[0]
    return z[circulant_index(n)]


def circulant_index(n: int) -> np.ndarray:
    k = np.arange(n)
    return (k[None, :] - k[:, None]) % n


def bispectrum(y) -> np.ndarray:
    """Bispectrum ``B[k1, k2] = y[k1] conj(y[k2]) y[k2 - k1]`` of DFT coefficients ``y``.

    Evaluated as the Hadamard product ``(y y^*) o C(y)``, which is Hermitian
    whenever ``y`` is conjugate symmetric.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 1 or y.shape[0] < 2:
        raise ValueError("bispectrum needs a 1-D coefficient vector of length >= 2")
    return np.outer(y, y.conj()) * circulant(y)


def signal_bispectrum(x, subtract_mean: bool = False) -> np.ndarray:
    x = as_signal(x)
    if subtract_mean:
        x = x - x.mean()
    y = np.fft.fft(x)
    if subtract_mean:
        y[0] = 0.0
    return bispectrum(y)


def hermitian_defect(B) -> float:
    """``||B - B^*||_F / ||B||_F`` (0 for the zero matrix)."""
    B = np.asarray(B)
    norm = np.linalg.norm(B)
    if norm == 0:
        return 0.0
    return float(np.linalg.norm(B - B.conj().T) / norm)


def normalize_bispectrum(B) -> np.ndarray:
    """Entrywise phase of a bispectrum, returned exactly Hermitian.

    The upper triangle is kept and mirrored; the diagonal is projected to the
    real unit values the phase convention allows.

    Raises
    ------
    NotHermitianError
        If ``B`` deviates from Hermitian by more than ``HERMITIAN_RTOL``
        (relative Frobenius norm), which signals a corrupted estimate.
    """
    B = np.asarray(B, dtype=np.complex128)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"bispectrum must be square, got shape {B.shape}")
    defect = hermitian_defect(B)
    if defect > HERMITIAN_RTOL:
        raise NotHermitianError(f"bispectrum is not Hermitian (relative defect {defect:.3g})")
    Bt = phase_array(B)
    upper = np.triu(Bt, 1)
    diag = Bt.diagonal().real
    return upper + upper.conj().T + np.diag(np.where(diag < 0, -1.0, 1.0)).astype(np.complex128)


def relative_error(truth, estimate) -> tuple[float, int]:
    """Shift-aligned relative error ``min_s ||R_s estimate - truth|| / ||truth||``.

    Returns ``(error, s)`` with the smallest minimizing shift. Candidate
    shifts come from an FFT cross-correlation; near-ties are resolved by
    evaluating the norms directly.
    """
    x = as_signal(truth, "truth")
    xh = as_signal(estimate, "estimate")
    if x.shape != xh.shape:
        raise ValueError(f"length mismatch: truth {x.shape[0]}, estimate {xh.shape[0]}")
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("relative error undefined for an all-zero truth signal")
    corr = np.fft.ifft(np.fft.fft(xh) * np.conj(np.fft.fft(x))).real
    # ||R_s xh - x||^2 = ||xh||^2 + ||x||^2 - 2 corr[s]
    slack = 1e-9 * (np.linalg.norm(xh) * nx + 1e-300)
    candidates = np.flatnonzero(corr >= corr.max() - slack)
    errs = [np.linalg.norm(np.roll(xh, -int(s)) - x) / nx for s in candidates]
    best = int(np.argmin(errs))
    return float(errs[best]), int(candidates[best])

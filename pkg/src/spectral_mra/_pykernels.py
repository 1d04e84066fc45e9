"""Pure-Python/NumPy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and return conventions; results agree with the compiled
versions to rounding, not bitwise.
"""

import cmath

import numpy as np

# Batch size for the vectorised triple product; bounds the (b, N, N) temporary.
_BISPEC_CHUNK_ELEMS = 1 << 21


def accumulate_spectra(H, n, power, out, zero_dc=True):
    b, h = H.shape
    if h != n // 2 + 1 or power.shape[0] != h:
        raise ValueError(f"half spectrum of length {h} does not match N={n}")
    if b == 0:
        return
    power += (H.real**2 + H.imag**2).sum(axis=0)
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    chunk = max(1, _BISPEC_CHUNK_ELEMS // (n * n))
    acc = np.zeros((n, n), dtype=np.complex128)
    for start in range(0, b, chunk):
        half = H[start:start + chunk]
        y = np.empty((half.shape[0], n), dtype=np.complex128)
        y[:, :h] = half
        y[:, h:] = np.conj(half[:, 1:n - h + 1][:, ::-1])
        if zero_dc:
            y[:, 0] = 0.0
        acc += np.einsum("ja,jb,jab->ab", y, y.conj(), y[:, idx], optimize=True)
    upper = np.triu(acc, 1)
    out += upper + upper.conj().T
    out[np.diag_indices(n)] += acc.diagonal().real


def _round_robin(n):
    """Disjoint (p, q) pairings covering every pair once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                pairs.append((min(a, b), max(a, b)))
        rounds.append((np.array([p for p, _ in pairs], dtype=np.intp),
                       np.array([q for _, q in pairs], dtype=np.intp)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(A_in, tol, max_sweeps):
    """Parallel-ordered complex Jacobi: every round rotates N/2 disjoint pairs at once."""
    A = np.array(A_in, dtype=np.complex128, order="C")
    n = A.shape[0]
    V = np.eye(n, dtype=np.complex128)
    thresh = tol * np.linalg.norm(A)
    rounds = _round_robin(n)
    sweep = 0
    rotated = True
    while sweep < max_sweeps:
        rotated = False
        for P, Q in rounds:
            apq = A[P, Q]
            mag = np.abs(apq)
            keep = mag > thresh
            if not keep.any():
                continue
            rotated = True
            P, Q, apq, mag = P[keep], Q[keep], apq[keep], mag[keep]
            e = apq / mag
            app = A[P, P].real
            aqq = A[Q, Q].real
            theta = (aqq - app) / (2.0 * mag)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            se, sec = s * e, s * e.conj()
            colp, colq = A[:, P].copy(), A[:, Q]
            A[:, P] = c * colp - sec * colq
            A[:, Q] = se * colp + c * colq
            colp, colq = V[:, P].copy(), V[:, Q]
            V[:, P] = c * colp - sec * colq
            V[:, Q] = se * colp + c * colq
            rowp, rowq = A[P, :].copy(), A[Q, :]
            A[P, :] = c[:, None] * rowp - se[:, None] * rowq
            A[Q, :] = sec[:, None] * rowp + c[:, None] * rowq
            A[P, P] = app - t * mag
            A[Q, Q] = aqq + t * mag
            A[P, Q] = 0.0
            A[Q, P] = 0.0
        sweep += 1
        if not rotated:
            break
    off = float(np.linalg.norm(A - np.diag(A.diagonal())))
    return A.diagonal().real.copy(), V, sweep if not rotated else -sweep, off


def _signed_index(k, n):
    return k if k <= n // 2 else k - n


def frequency_marching(B):
    n = B.shape[0]
    half = n // 2
    rows = B.tolist()
    z = [1.0 + 0j] * n
    for k in range(2, half + 1):
        acc = 0j
        for k1 in range(1, k // 2 + 1):
            acc += z[k1] * z[k - k1] * rows[k1][k].conjugate()
        acc /= k // 2
        mag = abs(acc)
        if mag <= 1e-12:
            return np.array(z, dtype=np.complex128), k
        z[k] = acc / mag
    for k in range(half + 1, n):
        z[k] = z[n - k].conjugate()
    sb = [_signed_index(k, n) for k in range(n)]
    acc = 0j
    for k1 in range(n):
        row = rows[k1]
        for k2 in range(n):
            m = (k2 - k1) % n
            e = sb[k1] - sb[k2] + sb[m]
            if e == 0:
                continue
            r = row[k2] * (z[k1] * z[k2].conjugate() * z[m]).conjugate()
            acc += r if e > 0 else r.conjugate()
    if abs(acc) > 1e-12:
        ang = cmath.phase(acc) / n
        z = [z[k] * cmath.exp(1j * ang * sb[k]) for k in range(n)]
    if n % 2 == 0:
        re = z[half].real
        z[half] = (1.0 if re > 0 else -1.0) if abs(re) > 1e-12 else 1.0
    return np.array(z, dtype=np.complex128), -1

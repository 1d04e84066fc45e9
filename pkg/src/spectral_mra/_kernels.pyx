# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Mirrors :mod:`spectral_mra._pykernels` one for one."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, atan2, cos, sin, hypot

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs(cplx z) nogil:
    return hypot(z.real, z.imag)


cdef inline cplx cconj(cplx z) nogil:
    return z.real - 1j * z.imag


def accumulate_spectra(cplx[:, ::1] H, Py_ssize_t n, double[::1] power, cplx[:, ::1] out,
                       bint zero_dc=True):
    """Add sum_j |H[j]|^2 into ``power`` and sum_j B_j into ``out``.

    B_j[k1,k2] = y[k1] conj(y[k2]) y[k2-k1].

    ``H`` holds half spectra (``numpy.fft.rfft`` rows) of real signals; row j
    expands to y = DFT(xi_j). With ``zero_dc`` the DC bin is dropped first,
    which is the bispectrum of the mean-subtracted signal. Only the upper
    triangle is formed; the lower one is its conjugate mirror.
    """
    cdef Py_ssize_t b = H.shape[0], h = H.shape[1]
    cdef Py_ssize_t j, k, k1, k2
    cdef double ar, ai, br, bi, cr, ci, yr, yi
    cdef double* row
    cdef double* Sr
    cdef double* Si
    cdef cnp.ndarray[double, ndim=1] row_arr = np.zeros(2 * n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] sr_arr = np.zeros((n, n), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] si_arr = np.zeros((n, n), dtype=np.float64)
    if h != n // 2 + 1 or power.shape[0] != h:
        raise ValueError(f"half spectrum of length {h} does not match N={n}")
    if b == 0:
        return
    row = <double*> cnp.PyArray_DATA(row_arr)
    with nogil:
        for j in range(b):
            # expand to the full, exactly conjugate-symmetric spectrum (interleaved re, im)
            for k in range(h):
                row[2 * k] = H[j, k].real
                row[2 * k + 1] = H[j, k].imag
                power[k] += row[2 * k] * row[2 * k] + row[2 * k + 1] * row[2 * k + 1]
            for k in range(h, n):
                row[2 * k] = H[j, n - k].real
                row[2 * k + 1] = -H[j, n - k].imag
            if zero_dc:
                row[0] = 0.0
                row[1] = 0.0
            for k1 in range(1, n):
                ar = row[2 * k1]
                ai = row[2 * k1 + 1]
                Sr = <double*> cnp.PyArray_GETPTR2(sr_arr, k1, 0)
                Si = <double*> cnp.PyArray_GETPTR2(si_arr, k1, 0)
                for k2 in range(k1, n):
                    br = row[2 * k2]
                    bi = row[2 * k2 + 1]
                    # c = a * conj(b)
                    cr = ar * br + ai * bi
                    ci = ai * br - ar * bi
                    yr = row[2 * (k2 - k1)]
                    yi = row[2 * (k2 - k1) + 1]
                    Sr[k2] += cr * yr - ci * yi
                    Si[k2] += cr * yi + ci * yr
            # row 0 carries the DC term
            ar = row[0]
            ai = row[1]
            if ar != 0.0 or ai != 0.0:
                Sr = <double*> cnp.PyArray_GETPTR2(sr_arr, 0, 0)
                Si = <double*> cnp.PyArray_GETPTR2(si_arr, 0, 0)
                for k2 in range(n):
                    br = row[2 * k2]
                    bi = row[2 * k2 + 1]
                    cr = ar * br + ai * bi
                    ci = ai * br - ar * bi
                    Sr[k2] += cr * br - ci * bi
                    Si[k2] += cr * bi + ci * br
    for k1 in range(n):
        out[k1, k1] = out[k1, k1] + sr_arr[k1, k1]
        for k2 in range(k1 + 1, n):
            out[k1, k2] = out[k1, k2] + (sr_arr[k1, k2] + 1j * si_arr[k1, k2])
            out[k2, k1] = out[k2, k1] + (sr_arr[k1, k2] - 1j * si_arr[k1, k2])


def jacobi_eigh(cplx[:, ::1] A_in, double tol, int max_sweeps):
    """Cyclic complex Jacobi. Returns (eigenvalues, eigenvectors, sweeps, off_norm).

    ``sweeps`` is negative when ``max_sweeps`` ran out before a rotation-free sweep.
    """
    cdef Py_ssize_t n = A_in.shape[0]
    cdef cnp.ndarray[double, ndim=2] Ar_arr = np.ascontiguousarray(np.real(A_in), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Ai_arr = np.ascontiguousarray(np.imag(A_in), dtype=np.float64)
    # eigenvectors stored transposed so each update touches two contiguous rows
    cdef cnp.ndarray[double, ndim=2] Vr_arr = np.eye(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Vi_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] Ar = Ar_arr
    cdef double[:, ::1] Ai = Ai_arr
    cdef double[:, ::1] Vr = Vr_arr
    cdef double[:, ::1] Vi = Vi_arr
    cdef Py_ssize_t p, q, k
    cdef double frob = 0.0, thresh, mag, theta, t, c, s, app, aqq, off
    cdef double er, ei, pr, pi, qr, qi
    cdef int sweep = 0, rotated = 1
    for p in range(n):
        for q in range(n):
            frob += Ar[p, q] * Ar[p, q] + Ai[p, q] * Ai[p, q]
    frob = sqrt(frob)
    thresh = tol * frob
    with nogil:
        while sweep < max_sweeps:
            rotated = 0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    mag = hypot(Ar[p, q], Ai[p, q])
                    if mag <= thresh:
                        continue
                    rotated = 1
                    er = Ar[p, q] / mag
                    ei = Ai[p, q] / mag
                    app = Ar[p, p]
                    aqq = Ar[q, q]
                    theta = (aqq - app) / (2.0 * mag)
                    if theta >= 0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    # J_pp = c, J_pq = s e, J_qp = -s conj(e), J_qq = c
                    # rows: A_p <- c A_p - s e A_q ; A_q <- s conj(e) A_p + c A_q
                    for k in range(n):
                        pr = Ar[p, k]; pi = Ai[p, k]
                        qr = Ar[q, k]; qi = Ai[q, k]
                        Ar[p, k] = c * pr - s * (er * qr - ei * qi)
                        Ai[p, k] = c * pi - s * (er * qi + ei * qr)
                        Ar[q, k] = s * (er * pr + ei * pi) + c * qr
                        Ai[q, k] = s * (er * pi - ei * pr) + c * qi
                    # columns of V (rows of V^T): V_p <- c V_p - s conj(e) V_q ; V_q <- s e V_p + c V_q
                    for k in range(n):
                        pr = Vr[p, k]; pi = Vi[p, k]
                        qr = Vr[q, k]; qi = Vi[q, k]
                        Vr[p, k] = c * pr - s * (er * qr + ei * qi)
                        Vi[p, k] = c * pi - s * (er * qi - ei * qr)
                        Vr[q, k] = s * (er * pr - ei * pi) + c * qr
                        Vi[q, k] = s * (er * pi + ei * pr) + c * qi
                    # Hermitian: columns p, q are conjugates of the updated rows
                    for k in range(n):
                        Ar[k, p] = Ar[p, k]
                        Ai[k, p] = -Ai[p, k]
                        Ar[k, q] = Ar[q, k]
                        Ai[k, q] = -Ai[q, k]
                    Ar[p, p] = app - t * mag
                    Ar[q, q] = aqq + t * mag
                    Ai[p, p] = 0.0
                    Ai[q, q] = 0.0
                    Ar[p, q] = 0.0
                    Ai[p, q] = 0.0
                    Ar[q, p] = 0.0
                    Ai[q, p] = 0.0
            sweep += 1
            if not rotated:
                break
    off = 0.0
    for p in range(n):
        for q in range(n):
            if p != q:
                off += Ar[p, q] * Ar[p, q] + Ai[p, q] * Ai[p, q]
    w = Ar_arr.diagonal().copy()
    V = (Vr_arr + 1j * Vi_arr).T.copy()
    return w, V, sweep if not rotated else -sweep, sqrt(off)


cdef inline Py_ssize_t signed_index(Py_ssize_t k, Py_ssize_t n) nogil:
    if k <= n // 2:
        return k
    return k - n


def frequency_marching(cplx[:, ::1] B):
    """March phases upward from frequency 1, then resolve the wrap-around phase.

    Returns (phases, bad_k); bad_k >= 0 flags a vanishing marching sum.
    """
    cdef Py_ssize_t n = B.shape[0]
    cdef Py_ssize_t half = n // 2
    cdef cnp.ndarray[cplx, ndim=1] z_arr = np.ones(n, dtype=np.complex128)
    cdef cplx[::1] z = z_arr
    cdef Py_ssize_t k, k1, k2, m, e
    cdef cplx acc, r, zb
    cdef double mag, ang
    with nogil:
        for k in range(2, half + 1):
            acc = 0.0
            for k1 in range(1, k // 2 + 1):
                acc = acc + z[k1] * z[k - k1] * cconj(B[k1, k])
            acc = acc / (k // 2)
            mag = cabs(acc)
            if mag <= 1e-12:
                with gil:
                    return z_arr, k
            z[k] = acc / mag
        for k in range(half + 1, n):
            z[k] = cconj(z[n - k])
        acc = 0.0
        for k1 in range(n):
            for k2 in range(n):
                m = k2 - k1
                if m < 0:
                    m = m + n
                e = signed_index(k1, n) - signed_index(k2, n) + signed_index(m, n)
                if e == 0:
                    continue
                zb = z[k1] * cconj(z[k2]) * z[m]
                r = B[k1, k2] * cconj(zb)
                if e > 0:
                    acc = acc + r
                else:
                    acc = acc + cconj(r)
        if cabs(acc) > 1e-12:
            ang = atan2(acc.imag, acc.real) / n
            for k in range(n):
                e = signed_index(k, n)
                z[k] = z[k] * (cos(ang * e) + 1j * sin(ang * e))
        if n % 2 == 0:
            mag = z[half].real
            if fabs(mag) > 1e-12:
                z[half] = 1.0 if mag > 0 else -1.0
            else:
                z[half] = 1.0
    return z_arr, -1

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same signatures as ``_fallback``."""
import numpy as np
cimport cython
from libc.math cimport fabs


cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


def spectral_density(double[::1] omega, double[:, ::1] A, double[:, ::1] C):
    cdef Py_ssize_t npts = omega.shape[0]
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t m = C.shape[1]
    if n != 5 or m > 8:
        raise ValueError("kernel is specialized to 5 states and at most 8 noise inputs")
    out_arr = np.zeros((npts, 4, 4))
    cdef double[:, :, ::1] out = out_arr
    cdef double complex M[5][5]
    cdef double complex X[5][8]
    cdef double complex piv, f, tmp
    cdef Py_ssize_t t, i, j, k, p
    cdef double best, acc
    with nogil:
        for t in range(npts):
            for i in range(5):
                for j in range(5):
                    M[i][j] = -A[i, j]
                M[i][i] = M[i][i] - 1j * omega[t]
                for j in range(m):
                    X[i][j] = C[i, j]
            # Gaussian elimination with partial pivoting
            for k in range(5):
                p = k
                best = cabs2(M[k][k])
                for i in range(k + 1, 5):
                    if cabs2(M[i][k]) > best:
                        best = cabs2(M[i][k])
                        p = i
                if p != k:
                    for j in range(5):
                        tmp = M[k][j]; M[k][j] = M[p][j]; M[p][j] = tmp
                    for j in range(m):
                        tmp = X[k][j]; X[k][j] = X[p][j]; X[p][j] = tmp
                piv = M[k][k]
                for i in range(k + 1, 5):
                    f = M[i][k] / piv
                    if f != 0:
                        for j in range(k, 5):
                            M[i][j] = M[i][j] - f * M[k][j]
                        for j in range(m):
                            X[i][j] = X[i][j] - f * X[k][j]
            for k in range(4, -1, -1):
                for j in range(m):
                    tmp = X[k][j]
                    for i in range(k + 1, 5):
                        tmp = tmp - M[k][i] * X[i][j]
                    X[k][j] = tmp / M[k][k]
            for i in range(4):
                for j in range(i, 4):
                    acc = 0.0
                    for k in range(m):
                        acc = acc + X[i][k].real * X[j][k].real + X[i][k].imag * X[j][k].imag
                    out[t, i, j] = acc
                    out[t, j, i] = acc
    return out_arr


def propagate(double[:, ::1] Phi, double[:, ::1] L, x0, z, Py_ssize_t skip):
    cdef double[:, ::1] x0v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[:, :, ::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t ntraj = zv.shape[0]
    cdef Py_ssize_t nsteps = zv.shape[1]
    cdef Py_ssize_t n = zv.shape[2]
    if n != 5:
        raise ValueError("kernel is specialized to 5 states")
    x_arr = np.array(x0v, dtype=np.float64)
    sums_arr = np.zeros((ntraj, 5, 5))
    peak_arr = np.zeros(ntraj)
    cdef double[:, ::1] xv = x_arr
    cdef double[:, :, ::1] sv = sums_arr
    cdef double[::1] pv = peak_arr
    cdef double s[5]
    cdef double y[5]
    cdef double acc[5][5]
    cdef double pk, a
    cdef Py_ssize_t r, k, i, j
    with nogil:
        for r in range(ntraj):
            for i in range(5):
                s[i] = xv[r, i]
                for j in range(5):
                    acc[i][j] = 0.0
            pk = 0.0
            for i in range(5):
                if fabs(s[i]) > pk:
                    pk = fabs(s[i])
            for k in range(nsteps):
                for i in range(5):
                    a = 0.0
                    for j in range(5):
                        a = a + Phi[i, j] * s[j] + L[i, j] * zv[r, k, j]
                    y[i] = a
                for i in range(5):
                    s[i] = y[i]
                if k >= skip:
                    for i in range(5):
                        for j in range(i, 5):
                            acc[i][j] = acc[i][j] + s[i] * s[j]
            for i in range(5):
                if fabs(s[i]) > pk:
                    pk = fabs(s[i])
                xv[r, i] = s[i]
                for j in range(i, 5):
                    sv[r, i, j] = acc[i][j]
                    sv[r, j, i] = acc[i][j]
            pv[r] = pk
    return x_arr, sums_arr, peak_arr

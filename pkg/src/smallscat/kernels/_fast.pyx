# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled Helmholtz pair-sum kernels.

Rows are distributed over OpenMP threads; each row's inner sum runs
sequentially in chunks (distance pass, then sin/cos passes the compiler can
vectorize, then accumulation), so results are run-to-run identical."""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt
from libc.stdlib cimport free, malloc

cimport openmp

cnp.import_array()

DEF FOUR_PI = 12.566370614359172
DEF CHUNK = 512


def set_num_threads(int n):
    if n > 0:
        openmp.omp_set_num_threads(n)


def helm_matvec(double[:, ::1] pts, double[::1] coef, double complex[::1] diag,
                double k, double complex[::1] x):
    """y_j = diag_j x_j + sum_{m != j} e^{ik r_jm} / (4 pi r_jm) coef_m x_m."""
    cdef Py_ssize_t m = pts.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] y = out
    cdef Py_ssize_t j, i, i0, i1, t, n
    cdef double dx, dy, dz, ar, ai, w, pjx, pjy, pjz
    cdef double *buf
    with nogil:
        for j in prange(m, schedule='static'):
            buf = <double *> malloc(3 * CHUNK * sizeof(double))
            ar = 0.0
            ai = 0.0
            pjx = pts[j, 0]
            pjy = pts[j, 1]
            pjz = pts[j, 2]
            i0 = 0
            while i0 < m:
                i1 = i0 + CHUNK
                if i1 > m:
                    i1 = m
                n = i1 - i0
                for t in range(n):
                    dx = pjx - pts[i0 + t, 0]
                    dy = pjy - pts[i0 + t, 1]
                    dz = pjz - pts[i0 + t, 2]
                    buf[t] = sqrt(dx * dx + dy * dy + dz * dz)
                for t in range(n):
                    buf[CHUNK + t] = cos(k * buf[t])
                for t in range(n):
                    buf[2 * CHUNK + t] = sin(k * buf[t])
                for t in range(n):
                    i = i0 + t
                    if i == j:
                        continue
                    w = coef[i] / (FOUR_PI * buf[t])
                    ar = ar + (buf[CHUNK + t] * x[i].real - buf[2 * CHUNK + t] * x[i].imag) * w
                    ai = ai + (buf[CHUNK + t] * x[i].imag + buf[2 * CHUNK + t] * x[i].real) * w
                i0 = i1
            y[j] = diag[j] * x[j] + ar + 1j * ai
            free(buf)
    return out


def helm_eval(double[:, ::1] targets, double[:, ::1] centers,
              double complex[::1] coef, double radius, double k):
    """v_i = sum_m e^{ik r_im} / (4 pi) coef_m w(r_im) with the ball weight
    w(r) = V(a)/r for r >= a, 2 pi (a^2 - r^2/3) for r < a."""
    cdef Py_ssize_t n = targets.shape[0]
    cdef Py_ssize_t m = centers.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] v = out
    cdef Py_ssize_t i, j, j0, j1, t, nn
    cdef double a = radius
    cdef double vol = FOUR_PI * a * a * a / 3.0
    cdef double dx, dy, dz, r, w, ar, ai, cr, ci, pix, piy, piz, cv, sv
    cdef double *buf
    with nogil:
        for i in prange(n, schedule='static'):
            buf = <double *> malloc(3 * CHUNK * sizeof(double))
            ar = 0.0
            ai = 0.0
            pix = targets[i, 0]
            piy = targets[i, 1]
            piz = targets[i, 2]
            j0 = 0
            while j0 < m:
                j1 = j0 + CHUNK
                if j1 > m:
                    j1 = m
                nn = j1 - j0
                for t in range(nn):
                    dx = pix - centers[j0 + t, 0]
                    dy = piy - centers[j0 + t, 1]
                    dz = piz - centers[j0 + t, 2]
                    buf[t] = sqrt(dx * dx + dy * dy + dz * dz)
                for t in range(nn):
                    buf[CHUNK + t] = cos(k * buf[t])
                for t in range(nn):
                    buf[2 * CHUNK + t] = sin(k * buf[t])
                for t in range(nn):
                    j = j0 + t
                    r = buf[t]
                    if r >= a:
                        w = vol / r
                    else:
                        w = 6.283185307179586 * (a * a - r * r / 3.0)
                    w = w / FOUR_PI
                    cv = buf[CHUNK + t] * w
                    sv = buf[2 * CHUNK + t] * w
                    cr = coef[j].real
                    ci = coef[j].imag
                    ar = ar + cv * cr - sv * ci
                    ai = ai + cv * ci + sv * cr
                j0 = j1
            v[i] = ar + 1j * ai
            free(buf)
    return out

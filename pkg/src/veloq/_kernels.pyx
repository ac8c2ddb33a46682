# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same signatures as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()

cdef double _SQ3 = sqrt(3.0)
cdef double W_SMALL = (3.0 - 2.0 * _SQ3) / 12.0
cdef double W_LARGE = (3.0 + 2.0 * _SQ3) / 12.0


cdef inline void _su2_step(double rabi, double delta, double h, double wa, double wb,
                           double pa, double pb, double complex* out) noexcept nogil:
    cdef double half = 0.5 * rabi
    cdef double wr = half * (wa * cos(pa) + wb * cos(pb))
    cdef double wi = half * (wa * sin(pa) + wb * sin(pb))
    cdef double bz = 0.25 * delta
    cdef double norm = sqrt(bz * bz + wr * wr + wi * wi)
    cdef double c = cos(h * norm)
    cdef double s = h if norm == 0.0 else sin(h * norm) / norm
    cdef double complex glob = cos(0.25 * delta * h) + 1j * sin(0.25 * delta * h)
    cdef double complex w = wr + 1j * wi
    cdef double complex wc = wr - 1j * wi
    out[0] = glob * (c - 1j * s * bz)
    out[1] = glob * (-1j * s * w)
    out[2] = glob * (-1j * s * wc)
    out[3] = glob * (c + 1j * s * bz)


def two_level_cf4(double rabi, double delta, double h, phase_a, phase_b):
    cdef const double[::1] pa = np.ascontiguousarray(phase_a, dtype=np.float64)
    cdef const double[::1] pb = np.ascontiguousarray(phase_b, dtype=np.float64)
    cdef Py_ssize_t k, nsteps = pa.shape[0]
    cdef double complex u00 = 1.0, u01 = 0.0, u10 = 0.0, u11 = 1.0
    cdef double complex t00, t01, t10, t11
    cdef double complex s[4]
    with nogil:
        for k in range(nsteps):
            _su2_step(rabi, delta, h, W_LARGE, W_SMALL, pa[k], pb[k], s)
            t00 = s[0] * u00 + s[1] * u10
            t01 = s[0] * u01 + s[1] * u11
            t10 = s[2] * u00 + s[3] * u10
            t11 = s[2] * u01 + s[3] * u11
            _su2_step(rabi, delta, h, W_SMALL, W_LARGE, pa[k], pb[k], s)
            u00 = s[0] * t00 + s[1] * t10
            u01 = s[0] * t01 + s[1] * t11
            u10 = s[2] * t00 + s[3] * t10
            u11 = s[2] * t01 + s[3] * t11
    return np.array([[u00, u01], [u10, u11]], dtype=np.complex128)


def chain_apply(first, second, psi):
    cdef const double complex[:, :, ::1] f = np.ascontiguousarray(first, dtype=np.complex128)
    cdef const double complex[:, :, ::1] g = np.ascontiguousarray(second, dtype=np.complex128)
    out_arr = np.array(psi, dtype=np.complex128)
    tmp_arr = np.empty_like(out_arr)
    cdef double complex[::1] out = out_arr
    cdef double complex[::1] tmp = tmp_arr
    cdef Py_ssize_t k, i, j, d = out.shape[0], nsteps = f.shape[0]
    cdef double complex acc
    with nogil:
        for k in range(nsteps):
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc = acc + f[k, i, j] * out[j]
                tmp[i] = acc
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc = acc + g[k, i, j] * tmp[j]
                out[i] = acc
    return out_arr


def apply_1q(double complex[::1] psi, int n, int q, u):
    cdef double complex u00 = u[0, 0], u01 = u[0, 1], u10 = u[1, 0], u11 = u[1, 1]
    cdef Py_ssize_t stride = 1 << (n - 1 - q)
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t base, off, i0, i1
    cdef double complex a, b
    with nogil:
        base = 0
        while base < dim:
            for off in range(stride):
                i0 = base + off
                i1 = i0 + stride
                a = psi[i0]
                b = psi[i1]
                psi[i0] = u00 * a + u01 * b
                psi[i1] = u10 * a + u11 * b
            base += 2 * stride


def apply_diag_2q(double complex[::1] psi, int n, int q1, int q2, diag):
    cdef double complex d[4]
    cdef int k
    for k in range(4):
        d[k] = diag[k]
    cdef Py_ssize_t s1 = n - 1 - q1, s2 = n - 1 - q2
    cdef Py_ssize_t idx, dim = psi.shape[0]
    with nogil:
        for idx in range(dim):
            psi[idx] = psi[idx] * d[2 * ((idx >> s1) & 1) + ((idx >> s2) & 1)]

# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the hot kernels (see _kernels_py for the reference
implementations and the algorithm notes)."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs


cdef double _SERIES_CUT = 8.0


cdef inline void _j01_series(double x, double* o0, double* o1) noexcept nogil:
    cdef double q = 0.25 * x * x
    cdef double t0 = 1.0, t1 = 1.0, s0 = 1.0, s1 = 1.0
    cdef int j
    for j in range(1, 30):
        t0 = -t0 * q / (j * j)
        t1 = -t1 * q / (j * (j + 1))
        s0 += t0
        s1 += t1
    o0[0] = s0
    o1[0] = 0.5 * x * s1


cdef inline void _j01_miller(double x, double* o0, double* o1) noexcept nogil:
    cdef double xr = x ** (1.0 / 3.0)
    cdef int m = <int>(x + 12.0 * xr + 32.0)
    cdef double pp = 0.0, pc = 1e-30, pm, s = 0.0, j1 = 0.0, f
    cdef int k, n
    if m % 2:
        m += 1
    for k in range(m, 0, -1):
        pm = (2.0 * k) / x * pc - pp
        pp = pc
        pc = pm
        n = k - 1
        if n == 1:
            j1 = pc
        if n > 0 and n % 2 == 0:
            s += 2.0 * pc
        if fabs(pc) > 1e200:
            f = 1e-200
            pp *= f
            pc *= f
            s *= f
            j1 *= f
    s += pc
    o0[0] = pc / s
    o1[0] = j1 / s


cdef inline void _j01(double x, double* o0, double* o1) noexcept nogil:
    if x <= _SERIES_CUT:
        _j01_series(x, o0, o1)
    else:
        _j01_miller(x, o0, o1)


def j01_arrays(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("Bessel kernels are defined for x >= 0")
    shape = x.shape
    cdef cnp.ndarray[double, ndim=1] xf = np.ravel(x)
    cdef Py_ssize_t n = xf.shape[0], i
    cdef cnp.ndarray[double, ndim=1] out0 = np.empty(n)
    cdef cnp.ndarray[double, ndim=1] out1 = np.empty(n)
    with nogil:
        for i in range(n):
            _j01(xf[i], &out0[i], &out1[i])
    return out0.reshape(shape), out1.reshape(shape)


def j0_array(x):
    return j01_arrays(x)[0]


def j1_array(x):
    return j01_arrays(x)[1]


def abs_power_mean(values, p):
    cdef cnp.ndarray[double, ndim=2] v = np.ascontiguousarray(
        np.atleast_2d(values), dtype=np.float64)
    cdef Py_ssize_t nr = v.shape[0], nc = v.shape[1], i, q
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nr)
    cdef double pp = float(p)
    cdef int ip = <int>(pp + 0.5), h, j
    cdef double acc, w, t
    if ip == pp and ip % 2 == 0 and ip >= 2:
        h = ip // 2
        with nogil:
            for i in range(nr):
                acc = 0.0
                for q in range(nc):
                    w = v[i, q] * v[i, q]
                    t = w
                    for j in range(h - 1):
                        t *= w
                    acc += t
                out[i] = acc / nc
    else:
        out = (np.abs(v) ** pp).mean(axis=-1)
    if np.asarray(values).ndim == 1:
        return float(out[0])
    return out


def weighted_abs_power_sum(values, weights, p):
    cdef cnp.ndarray[double, ndim=2] v = np.ascontiguousarray(
        np.atleast_2d(values), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.ascontiguousarray(
        weights, dtype=np.float64)
    cdef Py_ssize_t nr = v.shape[0], nc = v.shape[1], i, q
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nr)
    cdef double pp = float(p)
    cdef int ip = <int>(pp + 0.5), h, j
    cdef double acc, ww, t
    if ip == pp and ip % 2 == 0 and ip >= 2:
        h = ip // 2
        with nogil:
            for i in range(nr):
                acc = 0.0
                for q in range(nc):
                    ww = v[i, q] * v[i, q]
                    t = ww
                    for j in range(h - 1):
                        t *= ww
                    acc += t * w[q]
                out[i] = acc
    else:
        out = (np.abs(v) ** pp) @ w
    if np.asarray(values).ndim == 1:
        return float(out[0])
    return out

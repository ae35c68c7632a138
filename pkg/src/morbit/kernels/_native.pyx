# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see _pure.py for the spec)."""

from libc.math cimport sin, cos, fabs

import numpy as np

cdef double TWO_PI = 6.283185307179586476925286766559


cdef inline double _accel(double[::1] m, double[::1] n, double[::1] a,
                          double[::1] b, double T0, double t, double x) nogil:
    cdef double acc = 0.0, phi, w
    cdef Py_ssize_t k
    for k in range(m.shape[0]):
        phi = TWO_PI * (m[k] * t / T0 + n[k] * x)
        w = TWO_PI * n[k]
        acc -= w * (-a[k] * sin(phi) + b[k] * cos(phi))
    return acc


cdef inline double _curv(double[::1] m, double[::1] n, double[::1] a,
                         double[::1] b, double T0, double t, double x) nogil:
    cdef double c = 0.0, phi, w
    cdef Py_ssize_t k
    for k in range(m.shape[0]):
        phi = TWO_PI * (m[k] * t / T0 + n[k] * x)
        w = TWO_PI * n[k]
        c -= w * w * (a[k] * cos(phi) + b[k] * sin(phi))
    return c


def flow_rk4(m, n, a, b, double T0, double x0, double v0,
             double t0, double t1, Py_ssize_t steps):
    cdef double[::1] mm = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef double[::1] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    xs_arr = np.empty(steps + 1)
    vs_arr = np.empty(steps + 1)
    cdef double[::1] xs = xs_arr
    cdef double[::1] vs = vs_arr
    cdef double h = (t1 - t0) / steps
    cdef double x = x0, v = v0, t
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v
    cdef Py_ssize_t i
    xs[0] = x
    vs[0] = v
    with nogil:
        for i in range(steps):
            t = t0 + i * h
            k1x = v
            k1v = _accel(mm, nn, aa, bb, T0, t, x)
            k2x = v + 0.5 * h * k1v
            k2v = _accel(mm, nn, aa, bb, T0, t + 0.5 * h, x + 0.5 * h * k1x)
            k3x = v + 0.5 * h * k2v
            k3v = _accel(mm, nn, aa, bb, T0, t + 0.5 * h, x + 0.5 * h * k2x)
            k4x = v + h * k3v
            k4v = _accel(mm, nn, aa, bb, T0, t + h, x + h * k3x)
            x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            xs[i + 1] = x
            vs[i + 1] = v
    return xs_arr, vs_arr


def flow_rk4_var(m, n, a, b, double T0, double x0, double v0,
                 double t0, double t1, Py_ssize_t steps):
    cdef double[::1] mm = np.ascontiguousarray(m, dtype=np.float64)
    cdef double[::1] nn = np.ascontiguousarray(n, dtype=np.float64)
    cdef double[::1] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bb = np.ascontiguousarray(b, dtype=np.float64)
    xs_arr = np.empty(steps + 1)
    vs_arr = np.empty(steps + 1)
    cdef double[::1] xs = xs_arr
    cdef double[::1] vs = vs_arr
    cdef double h = (t1 - t0) / steps
    cdef double y[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef double t
    cdef Py_ssize_t i, j
    y[0] = x0; y[1] = v0
    y[2] = 1.0; y[3] = 0.0; y[4] = 0.0; y[5] = 1.0
    xs[0] = x0
    vs[0] = v0
    with nogil:
        for i in range(steps):
            t = t0 + i * h
            _var_rhs(mm, nn, aa, bb, T0, t, y, k1)
            for j in range(6):
                tmp[j] = y[j] + 0.5 * h * k1[j]
            _var_rhs(mm, nn, aa, bb, T0, t + 0.5 * h, tmp, k2)
            for j in range(6):
                tmp[j] = y[j] + 0.5 * h * k2[j]
            _var_rhs(mm, nn, aa, bb, T0, t + 0.5 * h, tmp, k3)
            for j in range(6):
                tmp[j] = y[j] + h * k3[j]
            _var_rhs(mm, nn, aa, bb, T0, t + h, tmp, k4)
            for j in range(6):
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            xs[i + 1] = y[0]
            vs[i + 1] = y[1]
    return xs_arr, vs_arr, np.array([y[2], y[3], y[4], y[5]])


cdef inline void _var_rhs(double[::1] m, double[::1] n, double[::1] a,
                          double[::1] b, double T0, double t,
                          double* s, double* out) nogil:
    cdef double acc = _accel(m, n, a, b, T0, t, s[0])
    cdef double c = _curv(m, n, a, b, T0, t, s[0])
    out[0] = s[1]
    out[1] = acc
    out[2] = s[4]
    out[3] = s[5]
    out[4] = -c * s[2]
    out[5] = -c * s[3]


cdef inline double _interp(double[::1] samples, double dtp,
                           Py_ssize_t nmax, double t) nogil:
    cdef double pos = t / dtp
    cdef Py_ssize_t i = <Py_ssize_t>pos
    if i < 0:
        i = 0
    if i > nmax - 1:
        i = nmax - 1
    cdef double frac = pos - i
    return samples[i] + frac * (samples[i + 1] - samples[i])


def monodromy_rk4(a_samples, double T, Py_ssize_t steps):
    cdef double[::1] av = np.ascontiguousarray(a_samples, dtype=np.float64)
    cdef Py_ssize_t nmax = av.shape[0] - 1
    cdef double dtp = T / nmax
    cdef double h = T / steps
    cdef double w[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double tmp[4]
    cdef double t, a1, a2, a4
    cdef Py_ssize_t i, j
    w[0] = 1.0; w[1] = 0.0; w[2] = 0.0; w[3] = 1.0
    with nogil:
        for i in range(steps):
            t = i * h
            a1 = _interp(av, dtp, nmax, t)
            a2 = _interp(av, dtp, nmax, t + 0.5 * h)
            a4 = _interp(av, dtp, nmax, t + h)
            k1[0] = w[2]; k1[1] = w[3]
            k1[2] = -a1 * w[0]; k1[3] = -a1 * w[1]
            for j in range(4):
                tmp[j] = w[j] + 0.5 * h * k1[j]
            k2[0] = tmp[2]; k2[1] = tmp[3]
            k2[2] = -a2 * tmp[0]; k2[3] = -a2 * tmp[1]
            for j in range(4):
                tmp[j] = w[j] + 0.5 * h * k2[j]
            k3[0] = tmp[2]; k3[1] = tmp[3]
            k3[2] = -a2 * tmp[0]; k3[3] = -a2 * tmp[1]
            for j in range(4):
                tmp[j] = w[j] + h * k3[j]
            k4[0] = tmp[2]; k4[1] = tmp[3]
            k4[2] = -a4 * tmp[0]; k4[3] = -a4 * tmp[1]
            for j in range(4):
                w[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
    return np.array([w[0], w[1], w[2], w[3]])


def neg_count_twisted(diag, double e, double corner_re, double corner_im,
                      double shift, double pivmin):
    cdef double[::1] d = np.ascontiguousarray(diag, dtype=np.float64)
    cdef Py_ssize_t nn = d.shape[0]
    cdef int neg = 0
    cdef double b00 = d[0] - shift
    cdef double b11 = d[nn - 1] - shift
    cdef double b01r = corner_re, b01i = corner_im
    cdef double u0r = e, u0i = 0.0, u1r = 0.0, u1i = 0.0
    cdef double p = d[1] - shift
    cdef double inv
    cdef Py_ssize_t i
    with nogil:
        for i in range(1, nn - 1):
            if i == nn - 2:
                u1r += e
            if fabs(p) < pivmin:
                p = -pivmin if p < 0.0 else pivmin
            if p < 0.0:
                neg += 1
            inv = 1.0 / p
            b00 -= (u0r * u0r + u0i * u0i) * inv
            b11 -= (u1r * u1r + u1i * u1i) * inv
            # b01 -= conj(u0) * u1 / p
            b01r -= (u0r * u1r + u0i * u1i) * inv
            b01i -= (u0r * u1i - u0i * u1r) * inv
            if i < nn - 2:
                u0r = -e * u0r * inv
                u0i = -e * u0i * inv
                u1r = -e * u1r * inv
                u1i = -e * u1i * inv
                p = d[i + 1] - shift - e * e * inv
    if fabs(b00) < pivmin:
        b00 = -pivmin if b00 < 0.0 else pivmin
    if b00 < 0.0:
        neg += 1
    if b11 - (b01r * b01r + b01i * b01i) / b00 < 0.0:
        neg += 1
    return neg

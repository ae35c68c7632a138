"""Pure-Python reference implementations of the hot kernels.

Same call signatures and semantics as the compiled extension in
``_native.pyx``; used as the import-time fallback and as the baseline
in the kernel benchmark.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi


def _accel(m, n, a, b, T0, t, x):
    # -V_x(t, x) for the Fourier model V = sum a*cos(phi) + b*sin(phi),
    # phi = 2*pi*(m*t/T0 + n*x)
    acc = 0.0
    for k in range(len(m)):
        phi = TWO_PI * (m[k] * t / T0 + n[k] * x)
        acc -= TWO_PI * n[k] * (-a[k] * math.sin(phi) + b[k] * math.cos(phi))
    return acc


def _curv(m, n, a, b, T0, t, x):
    # V_xx(t, x)
    c = 0.0
    for k in range(len(m)):
        phi = TWO_PI * (m[k] * t / T0 + n[k] * x)
        w = TWO_PI * n[k]
        c -= w * w * (a[k] * math.cos(phi) + b[k] * math.sin(phi))
    return c


def flow_rk4(m, n, a, b, T0, x0, v0, t0, t1, steps):
    """Integrate x' = v, v' = -V_x(t, x) with fixed-step classical RK4.

    Returns (xs, vs), arrays of length steps + 1 sampled at every step.
    """
    h = (t1 - t0) / steps
    xs = np.empty(steps + 1)
    vs = np.empty(steps + 1)
    x, v = float(x0), float(v0)
    xs[0], vs[0] = x, v
    for i in range(steps):
        t = t0 + i * h
        k1x = v
        k1v = _accel(m, n, a, b, T0, t, x)
        k2x = v + 0.5 * h * k1v
        k2v = _accel(m, n, a, b, T0, t + 0.5 * h, x + 0.5 * h * k1x)
        k3x = v + 0.5 * h * k2v
        k3v = _accel(m, n, a, b, T0, t + 0.5 * h, x + 0.5 * h * k2x)
        k4x = v + h * k3v
        k4v = _accel(m, n, a, b, T0, t + h, x + h * k3x)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        xs[i + 1], vs[i + 1] = x, v
    return xs, vs


def flow_rk4_var(m, n, a, b, T0, x0, v0, t0, t1, steps):
    """RK4 on the flow augmented with its 2x2 variational matrix.

    Returns (xs, vs, w) where w = [w00, w01, w10, w11] is the state
    transition matrix over [t0, t1], from W' = [[0, 1], [-V_xx, 0]] W,
    W(t0) = I.
    """
    h = (t1 - t0) / steps
    xs = np.empty(steps + 1)
    vs = np.empty(steps + 1)
    y = [float(x0), float(v0), 1.0, 0.0, 0.0, 1.0]

    def rhs(t, s):
        acc = _accel(m, n, a, b, T0, t, s[0])
        c = _curv(m, n, a, b, T0, t, s[0])
        return [s[1], acc, s[4], s[5], -c * s[2], -c * s[3]]

    xs[0], vs[0] = y[0], y[1]
    for i in range(steps):
        t = t0 + i * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, [y[j] + 0.5 * h * k1[j] for j in range(6)])
        k3 = rhs(t + 0.5 * h, [y[j] + 0.5 * h * k2[j] for j in range(6)])
        k4 = rhs(t + h, [y[j] + h * k3[j] for j in range(6)])
        y = [y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(6)]
        xs[i + 1], vs[i + 1] = y[0], y[1]
    return xs, vs, np.array(y[2:])


def monodromy_rk4(a_samples, T, steps):
    """Integrate W' = [[0, 1], [-A(t), 0]] W, W(0) = I, over [0, T].

    A(t) is piecewise linear through ``a_samples`` on the uniform grid
    t_i = i * T / (len(a_samples) - 1).  Returns [w00, w01, w10, w11].
    """
    np_nodes = len(a_samples) - 1
    dtp = T / np_nodes

    def aval(t):
        pos = t / dtp
        i = int(pos)
        if i < 0:
            i = 0
        if i > np_nodes - 1:
            i = np_nodes - 1
        frac = pos - i
        return a_samples[i] + frac * (a_samples[i + 1] - a_samples[i])

    h = T / steps
    w = [1.0, 0.0, 0.0, 1.0]

    def rhs(aa, s):
        return [s[2], s[3], -aa * s[0], -aa * s[1]]

    for i in range(steps):
        t = i * h
        a1 = aval(t)
        a2 = aval(t + 0.5 * h)
        a4 = aval(t + h)
        k1 = rhs(a1, w)
        k2 = rhs(a2, [w[j] + 0.5 * h * k1[j] for j in range(4)])
        k3 = rhs(a2, [w[j] + 0.5 * h * k2[j] for j in range(4)])
        k4 = rhs(a4, [w[j] + h * k3[j] for j in range(4)])
        w = [w[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) for j in range(4)]
    return np.array(w)


def neg_count_twisted(diag, e, corner_re, corner_im, shift, pivmin):
    """Count negative eigenvalues of a Hermitian periodic-tridiagonal matrix.

    The matrix has real diagonal ``diag``, constant real off-diagonal ``e``,
    wrap-around entries M[0, N-1] = corner (complex) and its conjugate, and
    is shifted by ``-shift * I``.  Counting is by symmetric elimination with
    the two wrap-coupled nodes ordered last (O(N), exact inertia); pivots
    smaller than ``pivmin`` in magnitude are clamped.
    """
    nn = len(diag)
    c = complex(corner_re, corner_im)
    neg = 0
    # border block over nodes {0, nn-1}
    b00 = diag[0] - shift
    b11 = diag[nn - 1] - shift
    b01 = c
    # eliminate chain nodes 1 .. nn-2
    u0 = complex(e)   # coupling of current chain node to node 0
    u1 = 0.0 + 0.0j   # coupling to node nn-1
    p = diag[1] - shift
    for i in range(1, nn - 1):
        if i == nn - 2:
            u1 += e
        if abs(p) < pivmin:
            p = -pivmin if p < 0.0 else pivmin
        if p < 0.0:
            neg += 1
        b00 -= (u0.real * u0.real + u0.imag * u0.imag) / p
        b11 -= (u1.real * u1.real + u1.imag * u1.imag) / p
        b01 -= u0.conjugate() * u1 / p
        if i < nn - 2:
            u0, u1 = -e * u0 / p, -e * u1 / p
            p = diag[i + 1] - shift - e * e / p
    if abs(b00) < pivmin:
        b00 = -pivmin if b00 < 0.0 else pivmin
    if b00 < 0.0:
        neg += 1
    p_last = b11 - (b01.real * b01.real + b01.imag * b01.imag) / b00
    if p_last < 0.0:
        neg += 1
    return neg

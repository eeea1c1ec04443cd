# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot-loop kernels: nonlocal stencil application and pair sums.

Both operate on per-side offset weights ``w`` where ``w[m]`` multiplies the
symmetric pair (u[i] - u[i+m]) + (u[i] - u[i-m]); ``w[0]`` is unused.  Under
zero extension, out-of-range neighbours read as 0 and ``tail`` adds the
analytic kernel mass beyond the truncation radius to the diagonal.
"""

import numpy as np

cimport cython
from cython.parallel cimport prange


def nonlocal_apply(double[::1] u, double[::1] w, double tail, bint periodic,
                   double[::1] out):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nw = w.shape[0]
    cdef Py_ssize_t i, m, jp, jm
    cdef double wm, acc
    with nogil:
        for i in range(n):
            acc = tail * u[i]
            if periodic:
                for m in range(1, nw):
                    wm = w[m]
                    if wm == 0.0:
                        continue
                    jp = i + m
                    if jp >= n:
                        jp -= n
                    jm = i - m
                    if jm < 0:
                        jm += n
                    acc += wm * (2.0 * u[i] - u[jp] - u[jm])
            else:
                for m in range(1, nw):
                    wm = w[m]
                    if wm == 0.0:
                        continue
                    jp = i + m
                    jm = i - m
                    if jp < n:
                        acc += wm * (u[i] - u[jp])
                    else:
                        acc += wm * u[i]
                    if jm >= 0:
                        acc += wm * (u[i] - u[jm])
                    else:
                        acc += wm * u[i]
            out[i] = acc
    return None


def pair_sum(double[::1] u, double[::1] v, double[::1] w, double tail,
             bint periodic):
    """Sum_m w[m] * sum_i (u_i - u_{i+m})(v_i - v_{i+m}) + boundary/tail terms.

    Chosen so that  dx * pair_sum(u, v) == dx * sum_i (L u)_i v_i  exactly,
    with L the operator realised by nonlocal_apply for the same weights.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t nw = w.shape[0]
    cdef Py_ssize_t i, m, j
    cdef double wm, s, total = 0.0, du, dv
    with nogil:
        for m in range(1, nw):
            wm = w[m]
            if wm == 0.0:
                continue
            s = 0.0
            if periodic:
                for i in range(n):
                    j = i + m
                    if j >= n:
                        j -= n
                    du = u[i] - u[j]
                    dv = v[i] - v[j]
                    s += du * dv
            else:
                for i in range(n - m):
                    du = u[i] - u[i + m]
                    dv = v[i] - v[i + m]
                    s += du * dv
                for i in range(n - m, n):
                    s += u[i] * v[i]
                for i in range(min(m, n)):
                    s += u[i] * v[i]
            total += wm * s
        if tail != 0.0:
            s = 0.0
            for i in range(n):
                s += u[i] * v[i]
            total += tail * s
    return total

"""Pure-NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Semantics are identical (up to floating-point summation order); speed is
not.  The benchmark in ``benchmarks/bench_kernels.py`` quantifies the gap.
"""

import numpy as np


def nonlocal_apply(u, w, tail, periodic, out):
    n = u.shape[0]
    acc = tail * u
    if periodic:
        for m in range(1, w.shape[0]):
            wm = w[m]
            if wm == 0.0:
                continue
            acc = acc + wm * (2.0 * u - np.roll(u, -m) - np.roll(u, m))
    else:
        for m in range(1, w.shape[0]):
            wm = w[m]
            if wm == 0.0:
                continue
            up = np.zeros(n)
            up[: n - m] = u[m:]
            um = np.zeros(n)
            um[m:] = u[: n - m]
            acc = acc + wm * (2.0 * u - up - um)
    out[:] = acc
    return None


def pair_sum(u, v, w, tail, periodic):
    n = u.shape[0]
    total = 0.0
    for m in range(1, w.shape[0]):
        wm = w[m]
        if wm == 0.0:
            continue
        if periodic:
            du = u - np.roll(u, -m)
            dv = v - np.roll(v, -m)
            s = float(np.dot(du, dv))
        else:
            du = u[: n - m] - u[m:]
            dv = v[: n - m] - v[m:]
            s = float(np.dot(du, dv))
            s += float(np.dot(u[n - m :], v[n - m :]))
            s += float(np.dot(u[: min(m, n)], v[: min(m, n)]))
        total += wm * s
    if tail != 0.0:
        total += tail * float(np.dot(u, v))
    return total

import numpy as np
import pytest
from scipy.integrate import quad


def quad_oracle(ufunc, x, lam, c_lambda=1.0, z_max=40.0, u2func=None,
                z_near=1e-4):
    """Adaptive-quadrature reference for the nonlocal operator at one point.

    Integrates the symmetrised integrand 2c (u(x) - (u(x+z)+u(x-z))/2)
    z^{-1-2l}.  On (0, z_near] the second difference cancels below machine
    precision, so that segment uses the Taylor value -u''(x) z^2 / 2
    integrated analytically (error O(z_near^{4-2l} u''''))); beyond z_max the
    tail is analytic assuming u vanishes there.  ``u2func`` defaults to a
    central finite difference of u.
    """
    if u2func is None:
        h = 1e-5

        def u2func(t):
            return (ufunc(t + h) - 2.0 * ufunc(t) + ufunc(t - h)) / h**2

    def sym(z):
        return (ufunc(x) - 0.5 * (ufunc(x + z) + ufunc(x - z))) \
            * z ** (-1.0 - 2.0 * lam)

    near = -0.5 * u2func(x) * z_near ** (2.0 - 2.0 * lam) / (2.0 - 2.0 * lam)
    mid1, _ = quad(sym, z_near, 1.0, limit=400)
    far, _ = quad(sym, 1.0, z_max, limit=400)
    tail = ufunc(x) * z_max ** (-2.0 * lam) / (2.0 * lam)
    return 2.0 * c_lambda * (near + mid1 + far + tail)


def truncated_kernel_constant(lam, big_r, c_lambda=1.0, z_near=1e-5):
    """2c int_0^R (1 - cos z) z^{-1-2l} dz: the response of sin(x) under the
    kernel truncated at radius R (quadrature oracle; the segment below
    z_near uses 1 - cos z ~ z^2/2 analytically)."""

    def g(z):
        return (1.0 - np.cos(z)) * z ** (-1.0 - 2.0 * lam)

    near = 0.5 * z_near ** (2.0 - 2.0 * lam) / (2.0 - 2.0 * lam)
    mid, _ = quad(g, z_near, 1.0, limit=400)
    far, _ = quad(g, 1.0, big_r, limit=400)
    return 2.0 * c_lambda * (near + mid + far)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

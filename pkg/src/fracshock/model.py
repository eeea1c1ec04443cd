"""Problem nonlinearities: flux, degenerate diffusion, and entropy machinery.

Conventions (matching the dynamics du = [eps*Lap u + d/dx f(u) - L A(u)] dt
+ noise):

* ``FluxSpec``  -- Lipschitz flux with f(0) = 0.
* ``DiffusionSpec`` -- nondecreasing Lipschitz A with A(0) = 0; A' may vanish
  on intervals (degenerate diffusion).
* ``EntropyPair`` -- smooth convex regularisation eta_delta of |.| with
  eta'(x) = sign(x) outside [-delta, delta].

Derived quantities:

* ``kruzkov_flux``  F(a,b)   = sign(a-b) (f(a) - f(b))
* ``entropy_flux``  Feta(a,k) = int_k^a eta'(s-k) f'(s) ds
* ``a_eta_k``       Aeta_k(a) = int_k^a eta'(s-k) A'(s) ds

The two integrals are evaluated by parts: the eta'' factor is supported on a
width-delta interval, so  int_k^a eta'(s-k) g'(s) ds
= g(a) eta'(a-k) - g(k) eta'(0) - int eta''(s-k) g(s) ds  with the remaining
integral over [k, clip(a, k-delta, k+delta)] done by fixed Gauss-Legendre
quadrature.  This is exact up to the quadrature error of a smooth integrand
on a width <= delta interval and is vectorised over ``a``.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
# mapped to [0, 1]
_GL_T = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


@dataclass(frozen=True)
class FluxSpec:
    """Scalar flux f with derivative and Lipschitz bound on the working range.

    ``eo_pos``/``eo_neg`` are the signed primitives int_0^v max(f',0) and
    int_0^v min(f',0) used by the monotone convective scheme; closed forms
    are supplied for the built-in fluxes.
    """

    name: str
    f: Callable
    f_prime: Callable
    lipschitz_bound: float
    eo_pos: Optional[Callable] = None
    eo_neg: Optional[Callable] = None


@dataclass(frozen=True)
class DiffusionSpec:
    name: str
    a: Callable
    a_prime: Callable
    lipschitz_bound: float


@dataclass(frozen=True)
class EntropyPair:
    """C^2 convex approximation of the absolute value with width delta.

    eta(x) = |x| for |x| > delta (up to the additive matching constant kept
    inside the blend), eta(0) = 0, eta'' >= 0 supported in [-delta, delta].
    """

    delta: float
    eta: Callable
    eta_prime: Callable
    eta_double_prime: Callable


@dataclass(frozen=True)
class InitialData:
    u0: np.ndarray
    l1_norm: float
    l2_norm: float
    tv: float


def make_initial_data(u0, grid):
    u0 = np.asarray(u0, dtype=np.float64)
    return InitialData(u0, grid.l1(u0), np.sqrt(grid.l2_sq(u0)), grid.tv(u0))


def make_eta_delta(delta):
    """Canonical smooth entropy: quartic blend on [-delta, delta].

    eta(x) = -x^4/(8 d^3) + 3 x^2/(4 d) + 3 d / 8 on the blend interval and
    |x| outside, which is C^2 with eta'' = 3(d^2 - x^2)/(2 d^3) >= 0.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    d = float(delta)

    def eta(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) <= d
        blend = -(x**4) / (8 * d**3) + 3 * x**2 / (4 * d) + 3 * d / 8
        return np.where(inside, blend, np.abs(x)) - 3 * d / 8

    def eta_prime(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) <= d
        blend = -(x**3) / (2 * d**3) + 3 * x / (2 * d)
        return np.where(inside, blend, np.sign(x))

    def eta_double_prime(x):
        x = np.asarray(x, dtype=np.float64)
        inside = np.abs(x) <= d
        return np.where(inside, 3 * (d**2 - x**2) / (2 * d**3), 0.0)

    return EntropyPair(d, eta, eta_prime, eta_double_prime)


def kruzkov_flux(a, b, flux):
    """F(a, b) = sign(a - b) * (f(a) - f(b)); symmetric in (a, b)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.sign(a - b) * (flux.f(a) - flux.f(b))


def _eta_pp_correction(a, k, g, ep):
    """int_k^clip(a) g(s) eta''(s - k) ds, vectorised over a.

    The integrand vanishes outside [k - delta, k + delta], so the value is
    constant once a leaves that band; only in-band entries need quadrature.
    """
    a = np.asarray(a, dtype=np.float64)
    d = ep.delta

    def seg(span_vals):
        nodes = k + np.multiply.outer(_GL_T, span_vals)
        vals = g(nodes) * ep.eta_double_prime(nodes - k)
        return np.tensordot(_GL_W, vals, axes=(0, 0)) * span_vals

    c_plus = float(seg(np.float64(d)))
    c_minus = float(seg(np.float64(-d)))
    flat = a.ravel()
    out = np.where(flat >= k, c_plus, c_minus)
    band = np.abs(flat - k) < d
    if band.any():
        out[band] = seg(flat[band] - k)
    return out.reshape(a.shape)


def _ibp_integral(a, k, g, ep):
    """int_k^a eta'(s - k) g'(s) ds for primitive g, by parts.

    Equals g(a) eta'(a - k) - int g(s) eta''(s - k) ds since eta'(0) = 0.
    """
    a = np.asarray(a, dtype=np.float64)
    return g(a) * ep.eta_prime(a - k) - _eta_pp_correction(a, k, g, ep)


def entropy_flux(a, k, flux, ep):
    """Feta(a, k) = int_k^a eta'(s - k) f'(s) ds."""
    return _ibp_integral(a, float(k), flux.f, ep)


def a_eta_k(a, k, diff, ep):
    """Aeta_k(a) = int_k^a eta'(s - k) A'(s) ds."""
    return _ibp_integral(a, float(k), diff.a, ep)


# ---------------------------------------------------------------------------
# Built-in flux / diffusion libraries
# ---------------------------------------------------------------------------


def linear_flux(c):
    """f(u) = c u."""
    c = float(c)

    def f(u):
        return c * np.asarray(u, dtype=np.float64)

    def f_prime(u):
        return np.full_like(np.asarray(u, dtype=np.float64), c)

    cp, cn = max(c, 0.0), min(c, 0.0)
    return FluxSpec(
        "linear", f, f_prime, abs(c),
        eo_pos=lambda v: cp * np.asarray(v, dtype=np.float64),
        eo_neg=lambda v: cn * np.asarray(v, dtype=np.float64),
    )


def burgers_flux(clip=2.0):
    """f(u) = u^2/2 with f' clipped to [-clip, clip] (globally Lipschitz).

    Inside [-clip, clip] this is exactly the quadratic flux; outside, f
    continues linearly with slope +-clip.  Runs assert the solution stays in
    the quadratic range.
    """
    m = float(clip)

    def f_prime(u):
        return np.clip(np.asarray(u, dtype=np.float64), -m, m)

    def f(u):
        u = np.asarray(u, dtype=np.float64)
        a = np.clip(u, -m, m)
        return 0.5 * a * a + m * np.maximum(np.abs(u) - m, 0.0)

    def eo_pos(v):
        # int_0^v max(f', 0) ds = int_0^v clip(s, 0, m) ds  (signed)
        v = np.asarray(v, dtype=np.float64)
        a = np.clip(v, 0.0, m)
        return 0.5 * a * a + m * np.maximum(v - m, 0.0)

    def eo_neg(v):
        # int_0^v clip(s, -m, 0) ds: quadratic piece on [-m, 0), slope -m below
        v = np.asarray(v, dtype=np.float64)
        a = np.clip(v, -m, 0.0)
        return 0.5 * a * a - m * np.minimum(v + m, 0.0)

    return FluxSpec("burgers", f, f_prime, m, eo_pos=eo_pos, eo_neg=eo_neg)


def zero_diffusion():
    def zfn(u):
        return np.zeros_like(np.asarray(u, dtype=np.float64))

    return DiffusionSpec("zero", zfn, zfn, 0.0)


def identity_diffusion(scale=1.0):
    s = float(scale)

    def a(u):
        return s * np.asarray(u, dtype=np.float64)

    def a_prime(u):
        return np.full_like(np.asarray(u, dtype=np.float64), s)

    return DiffusionSpec("identity", a, a_prime, s)


def ramp_diffusion(threshold=0.25, slope=1.0):
    """A(u) = slope * max(u - threshold, 0): degenerate below the threshold."""
    uc, s = float(threshold), float(slope)

    def a(u):
        return s * np.maximum(np.asarray(u, dtype=np.float64) - uc, 0.0)

    def a_prime(u):
        return s * (np.asarray(u, dtype=np.float64) > uc).astype(np.float64)

    if not a(0.0) == 0.0:
        raise ValueError("ramp threshold must be >= 0 so that A(0) = 0")
    return DiffusionSpec("ramp", a, a_prime, s)


def saturating_diffusion(scale=1.0, width=1.0):
    """A(u) = scale * width * tanh(u / width): Lipschitz, saturating."""
    s, w = float(scale), float(width)

    def a(u):
        return s * w * np.tanh(np.asarray(u, dtype=np.float64) / w)

    def a_prime(u):
        return s / np.cosh(np.asarray(u, dtype=np.float64) / w) ** 2

    return DiffusionSpec("saturating", a, a_prime, s)


def perturbed_diffusion(base, delta):
    """base + delta * P with P' = exp(-u^2): ||A' - B'||_inf = delta exactly."""
    d = float(delta)
    from scipy.special import erf

    def a(u):
        u = np.asarray(u, dtype=np.float64)
        return base.a(u) + d * 0.5 * np.sqrt(np.pi) * erf(u)

    def a_prime(u):
        u = np.asarray(u, dtype=np.float64)
        return base.a_prime(u) + d * np.exp(-(u**2))

    return DiffusionSpec(f"{base.name}+{d}*smooth", a, a_prime,
                         base.lipschitz_bound + d)


FLUXES = {"linear": linear_flux, "burgers": burgers_flux}
DIFFUSIONS = {
    "zero": zero_diffusion,
    "identity": identity_diffusion,
    "ramp": ramp_diffusion,
    "saturating": saturating_diffusion,
}


def bump_profile(x, amplitude=1.0, center=0.0, width=2.0):
    """Compactly supported C^1 bump: a cos^2(pi (x-c) / (2 w)) on |x-c| < w."""
    s = (np.asarray(x, dtype=np.float64) - center) / width
    return np.where(np.abs(s) < 1.0, amplitude * np.cos(0.5 * np.pi * s) ** 2, 0.0)


def box_profile(x, amplitude=1.0, center=0.0, width=2.0):
    s = np.abs(np.asarray(x, dtype=np.float64) - center)
    return np.where(s < width, amplitude, 0.0)


def gaussian_profile(x, amplitude=1.0, center=0.0, width=1.0):
    s = (np.asarray(x, dtype=np.float64) - center) / width
    return amplitude * np.exp(-(s**2))


PROFILES = {"bump": bump_profile, "box": box_profile, "gaussian": gaussian_profile}

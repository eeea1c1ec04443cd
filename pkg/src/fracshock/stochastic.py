"""Truncated cylindrical Wiener process and the multiplicative noise operator.

The driving noise is W(t) = sum_k e_k beta_k(t) truncated to ``n_modes``
independent scalar Brownian motions; the abstract basis vectors are absorbed
into the mode coefficient functions, so the operator acting on a state u is

    (Phi(u) dW)_i = sum_k g(k, x_i, u_i) dbeta_k.

The default family g_k(u) = sqrt(K) 2^{-k/2} u is linear with geometrically
decaying mode amplitudes, so sum_k g_k(u)^2 <= K u^2 with a truncation tail
that halves each time a mode is added.  The space-dependent variant
multiplies by a smooth bump profile (1 + chi(x))/2 in [1/2, 1]; solvers
restrict it to fractional orders below 1/2.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


@dataclass(frozen=True)
class NoiseSpec:
    """Mode family g(k, x, u) with the square-sum growth constant.

    Families that are linear in the state, g_k(x, u) = amps[k-1] p(x) u, may
    set ``linear_amps`` (and optionally ``linear_profile``); the per-step
    increment then collapses the mode sum into one vector operation.
    """

    name: str
    n_modes: int
    g: Callable  # (k, x, u) -> array, vectorised over x and u
    lipschitz_k: float
    space_dependent: bool = False
    linear_amps: Optional[np.ndarray] = None
    linear_profile: Optional[Callable] = None

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")


@dataclass(frozen=True)
class WienerPath:
    """Seeded Brownian increments, one row per step, one column per mode."""

    seed: int
    dt: float
    increments: np.ndarray  # (n_steps, n_modes), each ~ Normal(0, dt)

    @property
    def n_steps(self):
        return self.increments.shape[0]

    @property
    def n_modes(self):
        return self.increments.shape[1]


def sample_path(seed, n_steps, n_modes, dt):
    """Draw the increment array; identical seed gives a bit-identical path."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    rng = np.random.default_rng(seed)
    inc = rng.normal(0.0, np.sqrt(dt), size=(n_steps, n_modes))
    return WienerPath(int(seed), float(dt), inc)


def noise_increment(u, x_centers, spec, step_increments):
    """Per-cell noise kick sum_k g(k, x_i, u_i) * dbeta_k for one step."""
    step_increments = np.asarray(step_increments, dtype=np.float64)
    if step_increments.shape[0] != spec.n_modes:
        raise ValueError(
            f"path carries {step_increments.shape[0]} modes, "
            f"noise spec declares {spec.n_modes}"
        )
    u = np.asarray(u, dtype=np.float64)
    if spec.linear_amps is not None:
        kick = float(spec.linear_amps @ step_increments) * u
        if spec.linear_profile is not None:
            kick = kick * spec.linear_profile(x_centers)
        return kick
    out = np.zeros_like(u)
    for k in range(1, spec.n_modes + 1):
        out += spec.g(k, x_centers, u) * step_increments[k - 1]
    return out


def ito_correction(u, x_centers, spec):
    """G^2(u) = sum_k g(k, x, u)^2 per cell (Ito quadratic variation rate)."""
    u = np.asarray(u, dtype=np.float64)
    if spec.linear_amps is not None:
        out = float(spec.linear_amps @ spec.linear_amps) * u * u
        if spec.linear_profile is not None:
            out = out * spec.linear_profile(x_centers) ** 2
        return out
    out = np.zeros_like(u)
    for k in range(1, spec.n_modes + 1):
        gk = spec.g(k, x_centers, u)
        out += gk * gk
    return out


def geometric_noise(k_const=0.25, n_modes=16):
    """g_k(u) = sqrt(K) 2^{-k/2} u; sum of squares = K u^2 (1 - 2^-n) <= K u^2."""
    root_k = np.sqrt(float(k_const))
    amps = root_k * 2.0 ** (-0.5 * np.arange(1, int(n_modes) + 1))

    def g(k, x, u):
        return root_k * 2.0 ** (-0.5 * k) * np.asarray(u, dtype=np.float64)

    return NoiseSpec("geometric", int(n_modes), g, float(k_const),
                     linear_amps=amps)


def _smooth_bump(x, width):
    """C^infinity bump exp(1 - 1/(1 - (x/w)^2)) on |x| < w, 0 outside."""
    s = np.asarray(x, dtype=np.float64) / width
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return float(out[0]) if scalar else out


def space_dependent_noise(d1=0.25, n_modes=16, bump_width=4.0):
    """g_k(x, u) = amp * 2^{-k/2} u (1 + chi(x))/2 with a smooth bump chi.

    The amplitude is set so the two-point bound
    sum_k |g_k(x,u) - g_k(y,v)|^2 <= D1 (|x-y|^2 + |u-v|^2) holds on the
    working range |u| <= 4 (validated by ``validate_two_point_bound``).
    """
    w = float(bump_width)
    # max |d/dx (1+chi)/2| for the bump: |chi'| <= ~2.3/w
    slope = 2.3 / w
    u_range = 4.0
    margin = 2.0 * max(1.0, (u_range * slope) ** 2)
    amp = np.sqrt(float(d1) / margin)
    amps = amp * 2.0 ** (-0.5 * np.arange(1, int(n_modes) + 1))

    def profile(x):
        return 0.5 * (1.0 + _smooth_bump(x, w))

    def g(k, x, u):
        return amp * 2.0 ** (-0.5 * k) * np.asarray(u, dtype=np.float64) * profile(x)

    return NoiseSpec("geometric-xdep", int(n_modes), g, float(d1),
                     space_dependent=True, linear_amps=amps,
                     linear_profile=profile)


def validate_square_bound(spec, u_values, x_values):
    """Max of sum_k g_k(x,u)^2 / (K u^2) over a validation lattice (<= 1)."""
    worst = 0.0
    for x in np.atleast_1d(x_values):
        u = np.asarray(u_values, dtype=np.float64)
        total = ito_correction(u, np.full_like(u, x), spec)
        nz = u != 0.0
        if nz.any():
            worst = max(worst, float(np.max(total[nz] / (spec.lipschitz_k * u[nz] ** 2))))
    return worst


def validate_two_point_bound(spec, u_values, x_values):
    """Max of sum_k |g_k(x,u)-g_k(y,v)|^2 / (D1 (|x-y|^2+|u-v|^2)) (<= 1)."""
    xs = np.atleast_1d(np.asarray(x_values, dtype=np.float64))
    us = np.atleast_1d(np.asarray(u_values, dtype=np.float64))
    xg, ug = np.meshgrid(xs, us, indexing="ij")
    pts_x, pts_u = xg.ravel(), ug.ravel()
    worst = 0.0
    for i in range(len(pts_x)):
        dx2 = (pts_x - pts_x[i]) ** 2 + (pts_u - pts_u[i]) ** 2
        num = np.zeros_like(pts_x)
        for k in range(1, spec.n_modes + 1):
            d = spec.g(k, pts_x, pts_u) - spec.g(k, pts_x[i], pts_u[i])
            num += d * d
        mask = dx2 > 0
        if mask.any():
            worst = max(worst, float(np.max(num[mask] / (spec.lipschitz_k * dx2[mask]))))
    return worst


NOISE_FAMILIES = {
    "geometric": geometric_noise,
    "geometric-xdep": space_dependent_noise,
}

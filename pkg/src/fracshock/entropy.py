"""Monte Carlo residual checks of the entropy inequality.

For a smooth convex entropy eta centred at a constant k, a nonnegative test
function phi vanishing at the final time, and a split radius r, the residual

    R =   int eta(u0 - k) phi(0)
        + iint [ eta(u - k) dphi/dt - Feta(u, k) dphi/dx ]
        + sum_j iint eta'(u - k) g_j(u) phi dbeta_j
        + 1/2 iint G^2(u) eta''(u - k) phi
        - iint [ Lreg A(u) phi eta'(u - k) + Aeta_k(u) Lsing phi ]

is nonnegative in the vanishing-viscosity/vanishing-mesh limit; computed
ensembles are tested against a discretisation-aware tolerance.  Time
integrals (including the martingale term) use left-endpoint evaluation so
the stochastic term keeps its zero-mean property.

The pathwise Kato-type comparison of two coupled solutions,

    0 <= int |u0-v0| phi(0) + E iint [ |u-v| dphi/dt - F(u,v) dphi/dx
                                       - |A(u)-A(v)| L phi ],

is evaluated by :func:`kato_residual`.
"""

from dataclasses import dataclass

import numpy as np

from .fractional import apply_full, apply_regular, apply_singular, build_kernel
from .model import EntropyPair, kruzkov_flux, make_eta_delta
from .stochastic import ito_correction, noise_increment, sample_path


@dataclass(frozen=True)
class TestFunction:
    """Separable phi(t, x) = psi(t) * beta(x), nonnegative, beta compact.

    beta is the C^2 bump (1 - s^2)^3 with s = (x - center)/width; psi is
    (1 - t/T)^power, so phi(T, .) = 0 and phi is C^1 in time.
    """

    name: str
    center: float
    width: float
    t_end: float
    power: int = 1

    def beta(self, x):
        s = (np.asarray(x, dtype=np.float64) - self.center) / self.width
        return np.where(np.abs(s) < 1.0, (1.0 - s**2) ** 3, 0.0)

    def beta_prime(self, x):
        s = (np.asarray(x, dtype=np.float64) - self.center) / self.width
        inside = np.abs(s) < 1.0
        return np.where(inside, -6.0 * s * (1.0 - s**2) ** 2 / self.width, 0.0)

    def psi(self, t):
        return (1.0 - np.asarray(t, dtype=np.float64) / self.t_end) ** self.power

    def psi_prime(self, t):
        tau = 1.0 - np.asarray(t, dtype=np.float64) / self.t_end
        return -self.power * tau ** (self.power - 1) / self.t_end

    def check_support(self, grid):
        lo, hi = self.center - self.width, self.center + self.width
        if lo <= grid.x_min + grid.dx or hi >= grid.x_max - grid.dx:
            raise ValueError(
                f"test function {self.name!r} support [{lo}, {hi}] touches "
                f"the window [{grid.x_min}, {grid.x_max}]"
            )


def default_test_functions(t_end, centers=(-1.0, 1.0), width=2.5):
    """Library of four profiles: two centers times two time powers."""
    out = []
    for c in centers:
        for p in (1, 2):
            out.append(TestFunction(f"bump(c={c},p={p})", c, width, t_end, p))
    return out


@dataclass
class EntropyResidual:
    value: float
    std_error: float
    terms: dict
    per_path: np.ndarray
    k: float
    delta: float
    phi_name: str
    r_split: float

    @property
    def n_paths(self):
        return self.per_path.shape[0]


_TERM_NAMES = ("initial", "time", "flux", "martingale", "ito",
               "nonlocal_regular", "nonlocal_singular")


class _PathTables:
    """Per-path fields shared by every (k, delta, phi) combination."""

    def __init__(self, ensemble, kernel):
        self.ensemble = ensemble
        problem, config = ensemble.problem, ensemble.config
        self.grid = problem.grid
        self.kernel = kernel

    def build(self, traj):
        problem = self.ensemble.problem
        snaps = traj.snapshots            # (S, n), S = n_steps + 1
        n_steps = traj.n_steps
        if snaps.shape[0] != n_steps + 1:
            raise ValueError(
                "entropy residuals need dense snapshots (one per step); "
                f"got {snaps.shape[0]} rows for {n_steps} steps"
            )
        x = self.grid.centers
        left = snaps[:-1]
        tab = {
            "snaps": snaps,
            "left": left,
            "t_left": traj.times[:-1],
            "a_left": problem.diffusion.a(left),
            "f_left": problem.flux.f(left),
        }
        if problem.noise is not None:
            path = sample_path(traj.path_seed, n_steps, problem.noise.n_modes,
                               traj.dt)
            kick = np.empty_like(left)
            g2 = np.empty_like(left)
            for s in range(n_steps):
                kick[s] = noise_increment(left[s], x, problem.noise,
                                          path.increments[s])
                g2[s] = ito_correction(left[s], x, problem.noise)
            tab["kick"] = kick
            tab["g2"] = g2
        else:
            tab["kick"] = np.zeros_like(left)
            tab["g2"] = np.zeros_like(left)
        reg = np.empty_like(left)
        for s in range(n_steps):
            reg[s] = apply_regular(tab["a_left"][s], self.kernel)
        tab["reg"] = reg
        return tab


def _entropy_layers(tab, ensemble, ep, k):
    """(k, delta)-dependent fields shared by every test function."""
    left = tab["left"]
    return {
        "eta0": ep.eta(tab["snaps"][0] - k),
        "eta": ep.eta(left - k),
        "etap": ep.eta_prime(left - k),
        "etapp": ep.eta_double_prime(left - k),
        "feta": _ibp_integral_field(tab["f_left"], left, k, ep,
                                    ensemble.problem.flux.f),
        "aeta": _ibp_integral_field(tab["a_left"], left, k, ep,
                                    ensemble.problem.diffusion.a),
    }


def _phi_terms(tab, ensemble, lay, phi, beta, betap, lsing_beta):
    """The seven signed residual terms for one (path, entropy, k, phi)."""
    grid = ensemble.problem.grid
    dx, dt = grid.dx, ensemble.dt
    t_left = tab["t_left"]
    psi = phi.psi(t_left)
    psip = phi.psi_prime(t_left)

    initial = dx * float(phi.psi(0.0)) * float(lay["eta0"] @ beta)
    time = dt * dx * float(psip @ (lay["eta"] @ beta))
    flux = -dt * dx * float(psi @ (lay["feta"] @ betap))
    martingale = dx * float(psi @ ((lay["etap"] * tab["kick"]) @ beta))
    ito = 0.5 * dt * dx * float(psi @ ((tab["g2"] * lay["etapp"]) @ beta))
    nl_reg = -dt * dx * float(psi @ ((tab["reg"] * lay["etap"]) @ beta))
    nl_sing = -dt * dx * float(psi @ (lay["aeta"] @ lsing_beta))
    return dict(zip(_TERM_NAMES,
                    (initial, time, flux, martingale, ito, nl_reg, nl_sing)))


def _ibp_integral_field(g_left, u_left, k, ep, g):
    """int_k^u eta'(s-k) g'(s) ds on a (steps, cells) array via parts."""
    from .model import _eta_pp_correction

    return g_left * ep.eta_prime(u_left - k) - _eta_pp_correction(u_left, k, g, ep)


def entropy_report(ensemble, k_values, deltas, phis, r_split,
                   tol=None):
    """Residuals for every (phi, k, delta) over a shared ensemble.

    Returns a list of EntropyResidual in deterministic case order
    (phi-major, then delta, then k).
    """
    problem = ensemble.problem
    grid = problem.grid
    kernel = build_kernel(grid, problem.lam, problem.c_lambda, r_split)
    for phi in phis:
        phi.check_support(grid)
    eps = [make_eta_delta(d) for d in deltas]
    lsing = {phi.name: apply_singular(phi.beta(grid.centers), kernel)
             for phi in phis}

    tables = _PathTables(ensemble, kernel)
    beta_vals = {phi.name: phi.beta(grid.centers) for phi in phis}
    betap_vals = {phi.name: phi.beta_prime(grid.centers) for phi in phis}
    # accumulate per-case, per-path term values; layers shared across phis
    cases = [(phi, ep, float(k)) for phi in phis for ep in eps
             for k in k_values]
    per_case = {i: [] for i in range(len(cases))}
    index = {(phi.name, ep.delta, k): i for i, (phi, ep, k) in enumerate(cases)}
    for traj in ensemble.trajectories:
        tab = tables.build(traj)
        for ep in eps:
            for k in k_values:
                lay = _entropy_layers(tab, ensemble, ep, float(k))
                for phi in phis:
                    terms = _phi_terms(tab, ensemble, lay, phi,
                                       beta_vals[phi.name],
                                       betap_vals[phi.name],
                                       lsing[phi.name])
                    per_case[index[(phi.name, ep.delta, float(k))]].append(terms)

    out = []
    for i, (phi, ep, k) in enumerate(cases):
        rows = per_case[i]
        term_means = {name: float(np.mean([r[name] for r in rows]))
                      for name in _TERM_NAMES}
        per_path = np.array([sum(r[name] for name in _TERM_NAMES)
                             for r in rows])
        value = float(sum(term_means.values()))
        se = float(per_path.std(ddof=1) / np.sqrt(len(per_path))) \
            if len(per_path) > 1 else 0.0
        out.append(EntropyResidual(value, se, term_means, per_path, k,
                                   ep.delta, phi.name, kernel.r_split))
    return out


def entropy_residual(ensemble, k, ep, phi, r_split):
    """Single-case residual (mean, SE, term breakdown) for one entropy/phi."""
    if not isinstance(ep, EntropyPair):
        ep = make_eta_delta(ep)
    return entropy_report(ensemble, [k], [ep.delta], [phi], r_split)[0]


def residual_tolerance(ensemble, delta, scale=1.0):
    """Discretisation-aware tolerance c * (dx + dt + delta + eps)."""
    grid = ensemble.problem.grid
    return scale * (grid.dx + ensemble.dt + delta + ensemble.config.epsilon)


def kato_residual(ensemble_u, ensemble_v, phi, lam=None):
    """Mean +- SE of the two-solution comparison residual.

    The ensembles must be coupled: same seeds in the same order, same grid
    and snapshot times.  The nonlocal term applies the full operator to the
    test function.
    """
    pu, pv = ensemble_u.problem, ensemble_v.problem
    grid = pu.grid
    if (grid.n_cells, grid.dx, grid.x_min) != \
            (pv.grid.n_cells, pv.grid.dx, pv.grid.x_min):
        raise ValueError("coupled ensembles must share the grid")
    seeds_u = [t.path_seed for t in ensemble_u.trajectories]
    seeds_v = [t.path_seed for t in ensemble_v.trajectories]
    if seeds_u != seeds_v:
        raise ValueError("ensembles are not path-coupled (seed mismatch)")
    phi.check_support(grid)
    if lam is None:
        lam = pu.lam
    kernel = build_kernel(grid, lam, pu.c_lambda, max(2 * grid.dx, 0.25))
    beta = phi.beta(grid.centers)
    betap = phi.beta_prime(grid.centers)
    lfull_beta = apply_full(beta, kernel)
    dx = grid.dx

    vals = []
    for tu, tv in zip(ensemble_u.trajectories, ensemble_v.trajectories):
        if not np.array_equal(tu.times, tv.times):
            raise ValueError("coupled ensembles must share snapshot times")
        dt_rows = np.diff(tu.times)
        u, v = tu.snapshots[:-1], tv.snapshots[:-1]   # left endpoints
        t_left = tu.times[:-1]
        psi = phi.psi(t_left)
        psip = phi.psi_prime(t_left)
        absdiff = np.abs(u - v)
        fk = kruzkov_flux(u, v, pu.flux)
        adiff = np.abs(pu.diffusion.a(u) - pv.diffusion.a(v))
        initial = dx * float(phi.psi(0.0)) * float(np.abs(tu.snapshots[0] - tv.snapshots[0]) @ beta)
        time = dx * float((dt_rows * psip) @ (absdiff @ beta))
        flux = -dx * float((dt_rows * psi) @ (fk @ betap))
        nonlocal_term = -dx * float((dt_rows * psi) @ (adiff @ lfull_beta))
        vals.append(initial + time + flux + nonlocal_term)
    vals = np.asarray(vals)
    se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return {"value": float(vals.mean()), "std_error": se,
            "per_path": vals, "phi": phi.name}

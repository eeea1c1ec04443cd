"""Explicit Euler-Maruyama stepping of the viscous regularisation

    du = [eps * Lap_h u + d/dx f(u) - L A(u)] dt + sum_k g_k(u) dbeta_k

with a monotone convective flux, the resolvent smoothing of the initial
datum, and Monte Carlo ensemble drivers.  The nonlocal term is treated
explicitly; the time step obeys the combined parabolic / hyperbolic /
nonlocal stability bound of :func:`stable_dt`.

Noise is evaluated at the beginning-of-step state (Ito convention); a run is
deterministic given (problem, config, path).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .fractional import apply_full, build_kernel, h_lambda_seminorm_sq
from .grid import Grid
from .model import DiffusionSpec, FluxSpec
from .stochastic import NoiseSpec, noise_increment, sample_path

ENGQUIST_OSHER = "engquist_osher"
LAX_FRIEDRICHS = "lax_friedrichs"

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


class SolverBlowupError(RuntimeError):
    """Non-finite state detected during time stepping."""


class StabilityError(ValueError):
    """Requested dt exceeds the explicit stability bound."""


@dataclass(frozen=True)
class Problem:
    """Everything that defines the dynamics except the time discretisation."""

    grid: Grid
    flux: FluxSpec
    diffusion: DiffusionSpec
    noise: Optional[NoiseSpec]
    u0: np.ndarray
    lam: float
    c_lambda: float = 1.0

    @property
    def n_modes(self):
        return self.noise.n_modes if self.noise is not None else 1

    def __post_init__(self):
        if self.noise is not None and self.noise.space_dependent and self.lam >= 0.5:
            raise ValueError(
                "space-dependent noise requires a fractional order below 1/2"
            )


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.0
    dt: Optional[float] = None       # None means "auto" via stable_dt
    t_end: float = 0.5
    cfl_safety: float = 0.4
    convective_scheme: str = ENGQUIST_OSHER
    r_split: float = 0.5
    mollify: bool = True

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.t_end <= 0:
            raise ValueError("t_end must be positive")
        if self.convective_scheme not in (ENGQUIST_OSHER, LAX_FRIEDRICHS):
            raise ValueError(f"unknown scheme {self.convective_scheme!r}")


@dataclass
class Trajectory:
    times: np.ndarray          # (S,)
    snapshots: np.ndarray      # (S, n_cells)
    path_seed: int
    dt: float
    n_steps: int
    u_absmax: float = 0.0
    energy: Optional[dict] = None


@dataclass
class Ensemble:
    """A collection of trajectories sharing problem, config and step grid."""

    problem: Problem
    config: SolverConfig
    dt: float
    trajectories: list

    @property
    def times(self):
        return self.trajectories[0].times

    @property
    def n_paths(self):
        return len(self.trajectories)


@dataclass
class EnsembleSummary:
    times: np.ndarray
    n_paths: int
    stats: dict               # name -> {"mean": array, "se": array}
    per_path: Optional[dict] = None


def mollify_initial(u0, epsilon, grid):
    """Resolvent smoothing: solve (I - eps * Lap_h) v = u0.

    The inverse is an M-matrix inverse, so discrete L1 norm and total
    variation of the result never exceed those of the datum.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    u0 = np.asarray(u0, dtype=np.float64)
    if epsilon == 0.0:
        return u0.copy()
    n, dx = grid.n_cells, grid.dx
    c = epsilon / dx**2
    main = np.full(n, 1.0 + 2.0 * c)
    off = np.full(n - 1, -c)
    mat = scipy.sparse.diags([off, main, off], [-1, 0, 1], format="lil")
    if grid.periodic:
        mat[0, n - 1] = -c
        mat[n - 1, 0] = -c
    # zero-extension: ghost cells are 0, nothing to add
    return scipy.sparse.linalg.spsolve(mat.tocsc(), u0)


def stable_dt(config, flux, diffusion, kernel, grid):
    """cfl_safety * min(parabolic, hyperbolic, nonlocal) step bounds."""
    tiny = 1e-300
    bound = grid.dx**2 / (2.0 * config.epsilon + tiny)
    if flux.lipschitz_bound > 0:
        bound = min(bound, grid.dx / flux.lipschitz_bound)
    if diffusion.lipschitz_bound > 0:
        w_row = kernel.row_sum()
        if w_row > 0:
            bound = min(bound, 1.0 / (diffusion.lipschitz_bound * w_row))
    return config.cfl_safety * bound


def _eo_primitives(flux):
    if flux.eo_pos is not None and flux.eo_neg is not None:
        return flux.eo_pos, flux.eo_neg
    # generic fallback: fixed Gauss-Legendre quadrature of int_0^v (f')^{+-}
    def eo_pos(v):
        v = np.asarray(v, dtype=np.float64)
        nodes = 0.5 * np.multiply.outer(_GL_NODES + 1.0, v)
        vals = np.maximum(flux.f_prime(nodes), 0.0)
        return 0.5 * v * np.tensordot(_GL_WEIGHTS, vals, axes=(0, 0))

    def eo_neg(v):
        v = np.asarray(v, dtype=np.float64)
        nodes = 0.5 * np.multiply.outer(_GL_NODES + 1.0, v)
        vals = np.minimum(flux.f_prime(nodes), 0.0)
        return 0.5 * v * np.tensordot(_GL_WEIGHTS, vals, axes=(0, 0))

    return eo_pos, eo_neg


def convective_divergence(u, flux, scheme, grid):
    """Monotone conservative approximation of +d/dx f(u).

    Interface values q_{i+1/2} = q(u_i, u_{i+1}) use the upwind split
    q(a, b) = int_0^a min(f',0) + int_0^b max(f',0)  (Engquist-Osher,
    oriented for the +div sign of the dynamics) or the Lax-Friedrichs form
    q(a, b) = (f(a)+f(b))/2 + Lip(f) (b-a)/2; the divergence is
    (q_{i+1/2} - q_{i-1/2}) / dx.  Ghost states are periodic images or zero.
    """
    u = np.asarray(u, dtype=np.float64)
    n = u.shape[0]
    if grid.periodic:
        left = u
        right = np.roll(u, -1)
    else:
        left = u
        right = np.empty_like(u)
        right[:-1] = u[1:]
        right[-1] = 0.0
    if scheme == ENGQUIST_OSHER:
        eo_pos, eo_neg = _eo_primitives(flux)
        q = eo_neg(left) + eo_pos(right)
        if not grid.periodic:
            q_left_ghost = eo_pos(u[0])   # interface -1/2, ghost state 0
    elif scheme == LAX_FRIEDRICHS:
        alpha = flux.lipschitz_bound
        q = 0.5 * (flux.f(left) + flux.f(right)) + 0.5 * alpha * (right - left)
        if not grid.periodic:
            q_left_ghost = 0.5 * flux.f(u[0]) + 0.5 * alpha * u[0]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    div = np.empty_like(u)
    if grid.periodic:
        div[0] = q[0] - q[-1]
        div[1:] = q[1:] - q[:-1]
    else:
        div[0] = q[0] - q_left_ghost
        div[1:] = q[1:] - q[:-1]
    return div / grid.dx


class Stepper:
    """Precomputed context for repeated Euler-Maruyama steps."""

    def __init__(self, problem, config, dt=None):
        self.problem = problem
        self.config = config
        self.grid = problem.grid
        self.kernel = build_kernel(self.grid, problem.lam, problem.c_lambda,
                                   config.r_split)
        self.dt_bound = stable_dt(config, problem.flux, problem.diffusion,
                                  self.kernel, self.grid)
        if dt is None:
            dt = config.dt if config.dt is not None else self.dt_bound
        if dt > self.dt_bound * (1.0 + 1e-9):
            raise StabilityError(
                f"dt={dt:.6g} exceeds the stability bound {self.dt_bound:.6g}"
            )
        self.n_steps = max(1, math.ceil(config.t_end / dt - 1e-9))
        self.dt = config.t_end / self.n_steps
        self.x = self.grid.centers
        self._dx2 = self.grid.dx**2

    def laplacian(self, u):
        out = np.empty_like(u)
        if self.grid.periodic:
            out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
            out[0] = u[1] - 2.0 * u[0] + u[-1]
            out[-1] = u[0] - 2.0 * u[-1] + u[-2]
        else:
            out[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
            out[0] = u[1] - 2.0 * u[0]
            out[-1] = -2.0 * u[-1] + u[-2]
        return out / self._dx2

    def drift(self, u):
        p, c = self.problem, self.config
        total = convective_divergence(u, p.flux, c.convective_scheme, self.grid)
        if c.epsilon > 0.0:
            total = total + c.epsilon * self.laplacian(u)
        if p.diffusion.lipschitz_bound > 0.0:
            total = total - apply_full(p.diffusion.a(u), self.kernel)
        return total

    def step(self, u, step_increments=None):
        """One update u + dt * drift(u) + noise(u) dbeta."""
        out = u + self.dt * self.drift(u)
        if self.problem.noise is not None and step_increments is not None:
            out = out + noise_increment(u, self.x, self.problem.noise,
                                        step_increments)
        return out


def _snapshot_steps(n_steps, dt, t_end, snapshot_times):
    if snapshot_times is None:
        idx = np.array([0, n_steps])
    elif isinstance(snapshot_times, str) and snapshot_times == "dense":
        idx = np.arange(n_steps + 1)
    else:
        req = np.asarray(snapshot_times, dtype=np.float64)
        if (req < -1e-12).any() or (req > t_end + 1e-12).any():
            raise ValueError("snapshot times must lie in [0, t_end]")
        idx = np.unique(np.clip(np.round(req / dt).astype(int), 0, n_steps))
    return idx


def run(problem, config, path, snapshot_times=None, track_energy=False):
    """Integrate one path; deterministic given (problem, config, path)."""
    stepper = Stepper(problem, config, dt=path.dt)
    if path.n_steps != stepper.n_steps:
        raise ValueError(
            f"path has {path.n_steps} steps; t_end/dt requires {stepper.n_steps}"
        )
    if problem.noise is not None and path.n_modes != problem.noise.n_modes:
        raise ValueError("mode-count mismatch between path and noise spec")
    dt, n_steps = stepper.dt, stepper.n_steps
    grid = problem.grid

    u = mollify_initial(problem.u0, config.epsilon, grid) if config.mollify \
        else np.array(problem.u0, dtype=np.float64)

    snap_idx = _snapshot_steps(n_steps, dt, config.t_end, snapshot_times)
    snaps = np.empty((len(snap_idx), grid.n_cells))
    snap_pos = {int(s): i for i, s in enumerate(snap_idx)}

    energy = None
    if track_energy:
        energy = {
            "l2_sq_series": np.empty(n_steps + 1),
            "int_grad_sq": 0.0,
            "int_hlam_sq": 0.0,
        }

    u_absmax = float(np.max(np.abs(u)))
    if 0 in snap_pos:
        snaps[snap_pos[0]] = u
    for s in range(n_steps):
        if energy is not None:
            energy["l2_sq_series"][s] = grid.l2_sq(u)
            energy["int_grad_sq"] += dt * grid.grad_sq(u)
            energy["int_hlam_sq"] += dt * h_lambda_seminorm_sq(
                problem.diffusion.a(u), stepper.kernel)
        inc = path.increments[s] if problem.noise is not None else None
        u = stepper.step(u, inc)
        if not np.all(np.isfinite(u)):
            bad = int(np.flatnonzero(~np.isfinite(u))[0])
            raise SolverBlowupError(
                f"non-finite value at step {s + 1}/{n_steps} "
                f"(t={dt * (s + 1):.6g}), cell {bad}; dt={dt:.3e}, "
                f"stability bound {stepper.dt_bound:.3e}"
            )
        u_absmax = max(u_absmax, float(np.max(np.abs(u))))
        if (s + 1) in snap_pos:
            snaps[snap_pos[s + 1]] = u
    if energy is not None:
        energy["l2_sq_series"][n_steps] = grid.l2_sq(u)

    if problem.flux.name == "burgers" and u_absmax > problem.flux.lipschitz_bound:
        raise SolverBlowupError(
            f"solution reached |u|={u_absmax:.3g}, beyond the quadratic range "
            f"of the clipped flux ({problem.flux.lipschitz_bound:.3g})"
        )
    return Trajectory(snap_idx * dt, snaps, path.seed, dt, n_steps,
                      u_absmax, energy)


def resolve_dt(problem, config):
    """The actual step used for this (problem, config): auto or validated."""
    stepper = Stepper(problem, config)
    return stepper.dt, stepper.n_steps


def common_dt(cases):
    """Largest admissible common step for coupled (problem, config) cases."""
    dt = min(Stepper(p, c).dt_bound for p, c in cases)
    t_end = cases[0][1].t_end
    for _, c in cases:
        if c.t_end != t_end:
            raise ValueError("coupled cases must share t_end")
    if any(c.dt is not None for _, c in cases):
        dt = min([dt] + [c.dt for _, c in cases if c.dt is not None])
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    return t_end / n_steps, n_steps


DEFAULT_FUNCTIONALS = {
    "l1": lambda u, grid: grid.l1(u),
    "l2_sq": lambda u, grid: grid.l2_sq(u),
    "tv": lambda u, grid: grid.tv(u),
    "mass": lambda u, grid: grid.mass(u),
}


def _mean_se(values):
    values = np.asarray(values, dtype=np.float64)
    mean = values.mean(axis=0)
    if values.shape[0] > 1:
        se = values.std(axis=0, ddof=1) / np.sqrt(values.shape[0])
    else:
        se = np.zeros_like(mean)
    return mean, se


def run_ensemble(problem, config, seeds, functionals=None, snapshot_times=None,
                 track_energy=False, threads=1, keep_trajectories=False):
    """Monte Carlo ensemble; aggregation is deterministic in seed order."""
    if functionals is None:
        functionals = DEFAULT_FUNCTIONALS
    dt, n_steps = resolve_dt(problem, config)
    n_modes = problem.n_modes

    def one(seed):
        path = sample_path(seed, n_steps, n_modes, dt)
        return run(problem, config, path, snapshot_times=snapshot_times,
                   track_energy=track_energy)

    trajectories = _map_seeds(one, seeds, threads)

    times = trajectories[0].times
    per_path = {
        name: np.array([[fn(u, problem.grid) for u in tr.snapshots]
                        for tr in trajectories])
        for name, fn in functionals.items()
    }
    stats = {}
    for name, vals in per_path.items():
        mean, se = _mean_se(vals)
        stats[name] = {"mean": mean, "se": se}
    if track_energy:
        l2 = np.array([tr.energy["l2_sq_series"] for tr in trajectories])
        stats["energy"] = {
            "sup_mean_l2_sq": float(l2.mean(axis=0).max()),
            "eps_int_grad_sq": config.epsilon * float(
                np.mean([tr.energy["int_grad_sq"] for tr in trajectories])),
            "int_hlam_sq": float(
                np.mean([tr.energy["int_hlam_sq"] for tr in trajectories])),
        }
    summary = EnsembleSummary(times, len(trajectories), stats,
                              per_path=per_path)
    if keep_trajectories:
        return summary, Ensemble(problem, config, dt, trajectories)
    return summary


def run_coupled(cases, seeds, snapshot_times=None, pairs=((0, 1),),
                functionals=None, threads=1):
    """Drive several cases with identical Wiener paths and compare them.

    ``cases`` is a sequence of (problem, config) sharing grid and noise mode
    count; ``pairs`` lists index pairs whose pathwise L1 distance is
    recorded at the snapshot times.  Coupling (same increments for every
    case) is what makes the pathwise differences low-variance.
    """
    if len({(p.grid.n_cells, p.grid.dx, p.grid.x_min, p.grid.boundary)
            for p, _ in cases}) != 1:
        raise ValueError("coupled cases must share the grid")
    if len({p.n_modes for p, _ in cases}) != 1:
        raise ValueError("coupled cases must share the noise mode count")
    dt, n_steps = common_dt(cases)
    grid = cases[0][0].grid
    n_modes = cases[0][0].n_modes

    def one(seed):
        path = sample_path(seed, n_steps, n_modes, dt)
        trs = [run(p, c, path, snapshot_times=snapshot_times) for p, c in cases]
        out = {}
        for (i, j) in pairs:
            dists = [grid.l1(a - b) for a, b in
                     zip(trs[i].snapshots, trs[j].snapshots)]
            out[(i, j)] = np.array(dists)
        if functionals:
            out["functionals"] = {
                (ci, name): np.array([fn(u, grid) for u in trs[ci].snapshots])
                for ci in range(len(cases)) for name, fn in functionals.items()
            }
        out["times"] = trs[0].times
        return out

    results = _map_seeds(one, seeds, threads)

    times = results[0]["times"]
    dist_stats = {}
    dist_per_path = {}
    for pr in pairs:
        vals = np.array([r[pr] for r in results])
        mean, se = _mean_se(vals)
        dist_stats[pr] = {"mean": mean, "se": se}
        dist_per_path[pr] = vals
    return {"times": times, "dt": dt, "n_paths": len(results),
            "distances": dist_stats, "per_path": dist_per_path}


def _map_seeds(fn, seeds, threads):
    seeds = list(seeds)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, seeds))
    return [fn(s) for s in seeds]

"""Experiment harness for the quantitative bounds.

Every experiment couples its Monte Carlo runs through shared Wiener paths,
which makes the pathwise differences low-variance:

* ``l1_contraction``      E||u(t) - v(t)||_1 <= ||u0 - v0||_1 for two data.
* ``viscosity_rate``      E||u_eps(T) - u_ref(T)||_1 ~ eps^(1/2) or faster,
                          measured against a much finer-viscosity reference.
* ``continuous_dependence``  distance under a diffusion perturbation B = A +
                          delta * P scales at least like delta^(1/(1+lam)).
* ``energy_report``       sup_t E||u||_2^2 + eps int E||grad u||_2^2
                          + int E[|A(u)|_{H^lam}^2] stays bounded across an
                          eps sweep.

Rate fits are least squares in log-log space with a bootstrap confidence
interval over ensemble members; gates are one-sided (observing faster decay
than the theoretical upper bound never fails a test).
"""

import math
from dataclasses import dataclass, replace
import numpy as np

from .model import perturbed_diffusion
from .solver import run_coupled, run_ensemble


@dataclass
class RateFit:
    abscissae: np.ndarray
    ordinates: np.ndarray
    ordinate_ses: np.ndarray
    fitted_slope: float
    fitted_intercept: float
    r_squared: float
    slope_ci: tuple
    grid_limited: bool = False
    non_monotone: bool = False

    def to_dict(self):
        return {
            "points": [{"x": float(x), "mean": float(y), "se": float(s)}
                       for x, y, s in zip(self.abscissae, self.ordinates,
                                          self.ordinate_ses)],
            "slope": self.fitted_slope,
            "intercept": self.fitted_intercept,
            "r_squared": self.r_squared,
            "slope_ci": list(self.slope_ci),
            "grid_limited": self.grid_limited,
            "non_monotone": self.non_monotone,
        }


def _loglog_fit(xs, ys):
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    tss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / tss if tss > 0 else 1.0
    return float(slope), float(intercept), r2


def _check_geometric(xs, ratio_min=2.0, n_min=4):
    xs = np.asarray(xs, dtype=np.float64)
    if len(xs) < n_min:
        raise ValueError(f"rate fits need at least {n_min} points, got {len(xs)}")
    if not (np.diff(xs) < 0).all():
        raise ValueError("abscissae must be strictly decreasing")
    ratios = xs[:-1] / xs[1:]
    if (ratios < ratio_min * (1 - 1e-9)).any():
        raise ValueError(
            f"abscissae must decrease geometrically with ratio >= {ratio_min}"
        )
    return xs


def fit_rate(abscissae, per_path, boot_seed=0, n_boot=800,
             ratio_min=2.0):
    """Log-log fit of ensemble-mean ordinates with a bootstrap slope CI.

    ``per_path`` has shape (n_paths, n_points); the bootstrap resamples
    paths with replacement, so the CI reflects Monte Carlo error only.
    """
    xs = _check_geometric(abscissae, ratio_min=ratio_min)
    per_path = np.asarray(per_path, dtype=np.float64)
    means = per_path.mean(axis=0)
    n_paths = per_path.shape[0]
    ses = per_path.std(axis=0, ddof=1) / np.sqrt(n_paths) if n_paths > 1 \
        else np.zeros_like(means)
    if (means <= 0).any():
        raise ValueError("ordinates must be positive for a log-log fit")
    slope, intercept, r2 = _loglog_fit(xs, means)

    if n_paths > 1:
        rng = np.random.default_rng(boot_seed)
        slopes = np.empty(n_boot)
        for b in range(n_boot):
            idx = rng.integers(0, n_paths, n_paths)
            m = per_path[idx].mean(axis=0)
            m = np.maximum(m, 1e-300)
            slopes[b] = _loglog_fit(xs, m)[0]
        ci = (float(np.percentile(slopes, 2.5)),
              float(np.percentile(slopes, 97.5)))
    else:
        ci = (slope, slope)

    # plateau / ordering diagnostics
    se_pair = ses[:-1] + ses[1:]
    non_monotone = bool((means[1:] > means[:-1] + 3 * se_pair).any())
    grid_limited = bool((means[1:] > 0.9 * means[:-1] + 3 * se_pair).any())
    return RateFit(xs, means, ses, slope, intercept, r2, ci,
                   grid_limited=grid_limited, non_monotone=non_monotone)


def l1_contraction(problem, u0, v0, config, seeds, tol=0.02, threads=1):
    """Coupled-path check of E||u(t) - v(t)||_1 <= ||u0 - v0||_1.

    Pass iff mean distance <= ||u0-v0||_1 (1 + tol) + 3 SE at every
    snapshot time.
    """
    grid = problem.grid
    pu = replace(problem, u0=np.asarray(u0, dtype=np.float64))
    pv = replace(problem, u0=np.asarray(v0, dtype=np.float64))
    res = run_coupled([(pu, config), (pv, config)], seeds,
                      snapshot_times=np.linspace(0, config.t_end, 6),
                      threads=threads)
    d0 = grid.l1(np.asarray(u0) - np.asarray(v0))
    mean = res["distances"][(0, 1)]["mean"]
    se = res["distances"][(0, 1)]["se"]
    bound = d0 * (1.0 + tol) + 3.0 * se
    return {
        "experiment": "l1_contraction",
        "initial_distance": d0,
        "times": res["times"].tolist(),
        "mean": mean.tolist(),
        "se": se.tolist(),
        "bound": bound.tolist(),
        "n_paths": res["n_paths"],
        "dt": res["dt"],
        "pass": bool((mean <= bound).all()),
    }


def viscosity_rate(problem, config, eps_list, seeds, eps_ref=None,
                   slope_tol=0.05, ci_floor=0.3, reference_field=None,
                   boot_seed=7, threads=1):
    """Vanishing-viscosity convergence: fit E||u_eps(T) - u_ref(T)||_1 ~ eps^p.

    The reference is a coupled run at ``eps_ref <= min(eps_list)/8`` standing
    in for the zero-viscosity limit, or an externally supplied field at time
    T (``reference_field``, e.g. an exact solution in deterministic checks).
    Pass iff the fitted slope is >= 0.5 - slope_tol and the bootstrap CI
    stays above ``ci_floor``.
    """
    eps = _check_geometric(eps_list)
    grid = problem.grid
    cases = [(problem, replace(config, epsilon=float(e))) for e in eps]
    if reference_field is None:
        if eps_ref is None:
            eps_ref = float(eps.min()) / 8.0
        if eps_ref > float(eps.min()) / 8.0 + 1e-15:
            raise ValueError("eps_ref must be at most min(eps_list)/8")
        cases.append((problem, replace(config, epsilon=eps_ref)))
        ref_idx = len(cases) - 1
        pairs = [(j, ref_idx) for j in range(len(eps))]
        res = run_coupled(cases, seeds, snapshot_times=[config.t_end],
                          pairs=pairs, threads=threads)
        per_path = np.column_stack(
            [res["per_path"][(j, ref_idx)][:, -1] for j in range(len(eps))])
        dt = res["dt"]
        n_paths = res["n_paths"]
    else:
        ref = np.asarray(reference_field, dtype=np.float64)
        cols = []
        dt = None
        for j in range(len(eps)):
            summary, ens = run_ensemble(cases[j][0], cases[j][1], seeds,
                                        snapshot_times=[config.t_end],
                                        threads=threads,
                                        keep_trajectories=True)
            cols.append([grid.l1(tr.snapshots[-1] - ref)
                         for tr in ens.trajectories])
            dt = ens.dt
        per_path = np.column_stack(cols)
        eps_ref = None
        n_paths = per_path.shape[0]

    fit = fit_rate(eps, per_path, boot_seed=boot_seed)
    passed = (fit.fitted_slope >= 0.5 - slope_tol
              and fit.slope_ci[0] > ci_floor
              and not fit.grid_limited)
    return {
        "experiment": "viscosity_rate",
        "eps_ref": eps_ref,
        "dt": dt,
        "n_paths": n_paths,
        "fit": fit.to_dict(),
        "slope_threshold": 0.5 - slope_tol,
        "ci_floor": ci_floor,
        "pass": bool(passed),
        "rate_fit": fit,
    }


def continuous_dependence(problem, config, delta_list, seeds, slope_tol=0.05,
                          boot_seed=11, threads=1):
    """Diffusion-perturbation study: B_j = A + delta_j * P, ||P'||_inf = 1.

    Both members of each coupled pair start from the same datum, so the
    theoretical bound reduces to C [T ||A' - B'||_inf]^(1/(1+lam)); pass iff
    the fitted slope is >= 1/(1+lam) - slope_tol.
    """
    deltas = _check_geometric(delta_list)
    base = (problem, config)
    cases = [base]
    for d in deltas:
        pj = replace(problem, diffusion=perturbed_diffusion(problem.diffusion,
                                                            float(d)))
        cases.append((pj, config))
    pairs = [(0, j + 1) for j in range(len(deltas))]
    res = run_coupled(cases, seeds, snapshot_times=[config.t_end],
                      pairs=pairs, threads=threads)
    per_path = np.column_stack(
        [res["per_path"][(0, j + 1)][:, -1] for j in range(len(deltas))])
    fit = fit_rate(deltas, per_path, boot_seed=boot_seed)
    threshold = 1.0 / (1.0 + problem.lam) - slope_tol
    return {
        "experiment": "continuous_dependence",
        "lam": problem.lam,
        "dt": res["dt"],
        "n_paths": res["n_paths"],
        "fit": fit.to_dict(),
        "slope_threshold": threshold,
        "pass": bool(fit.fitted_slope >= threshold),
        "rate_fit": fit,
    }


def energy_report(problem, config, eps_list, seeds, ratio_tol=3.0, threads=1):
    """Uniform-in-eps boundedness of the three-term energy functional."""
    totals, rows = [], []
    for e in np.asarray(eps_list, dtype=np.float64):
        summary = run_ensemble(problem, replace(config, epsilon=float(e)),
                               seeds, track_energy=True, threads=threads)
        en = summary.stats["energy"]
        total = en["sup_mean_l2_sq"] + en["eps_int_grad_sq"] + en["int_hlam_sq"]
        totals.append(total)
        rows.append({"epsilon": float(e), "total": total, **en})
    totals = np.asarray(totals)
    ratio = float(totals.max() / totals.min()) if totals.min() > 0 else math.inf
    return {
        "experiment": "energy",
        "rows": rows,
        "max_min_ratio": ratio,
        "ratio_tol": ratio_tol,
        "n_paths": len(list(seeds)),
        "pass": bool(ratio <= ratio_tol),
    }

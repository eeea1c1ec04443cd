"""Fast invariant battery behind the ``selftest`` subcommand.

Checks operator identities, quadrature-oracle agreement, model-function
bounds, statistical sanity of the noise generator, a deterministic
transport convergence order, and bit-level reproducibility.  Each check
prints one PASS/FAIL line; the battery is independent of pytest so it can
run on a bare install.
"""

import numpy as np

from .fractional import (apply_full, apply_regular, apply_singular,
                         bilinear_form, build_kernel)
from .grid import Grid
from .model import (a_eta_k, burgers_flux, entropy_flux, kruzkov_flux,
                    linear_flux, make_eta_delta, ramp_diffusion)
from .solver import Problem, SolverConfig, mollify_initial, resolve_dt, run
from .stochastic import geometric_noise, sample_path


def _quad_oracle(ufunc, x, lam, c_lambda=1.0, z_max=40.0):
    from scipy.integrate import quad

    p = 2.0 / (2.0 - 2.0 * lam)  # substitution z = s^p smooths the integrand

    def sym(z):
        return (ufunc(x) - 0.5 * (ufunc(x + z) + ufunc(x - z))) \
            * z ** (-1.0 - 2.0 * lam)

    near, _ = quad(lambda s: sym(s**p) * p * s ** (p - 1.0), 0.0, 1.0,
                   limit=200)
    far, _ = quad(sym, 1.0, z_max, limit=200)
    tail = ufunc(x) * z_max ** (-2.0 * lam) / (2.0 * lam)
    return 2.0 * c_lambda * (near + far + tail)


def run_selftest():
    checks = []

    def record(name, ok, detail):
        checks.append({"name": name, "pass": bool(ok), "detail": detail})
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    rng = np.random.default_rng(2024)

    # --- operator identities -------------------------------------------
    for boundary in ("periodic", "zero-extension"):
        grid = Grid.from_window(128, -4, 4, boundary)
        kernel = build_kernel(grid, 0.6, 1.0, 0.4)
        u = rng.normal(size=128)
        v = rng.normal(size=128)
        gap = np.max(np.abs(apply_full(u, kernel)
                            - apply_singular(u, kernel)
                            - apply_regular(u, kernel)))
        record(f"split identity ({boundary})", gap <= 1e-12, f"max |gap| = {gap:.2e}")
        sym = abs(bilinear_form(u, v, kernel) - bilinear_form(v, u, kernel))
        psd = bilinear_form(u, u, kernel)
        record(f"bilinear form ({boundary})", sym <= 1e-12 and psd >= 0,
               f"asym = {sym:.2e}, quad = {psd:.3g}")
        dual = abs(bilinear_form(u, v, kernel)
                   - grid.dx * float(apply_full(u, kernel) @ v))
        record(f"bilinear/operator duality ({boundary})", dual <= 1e-10 * max(1, abs(psd)),
               f"|gap| = {dual:.2e}")

    grid_p = Grid.from_window(128, -4, 4, "periodic")
    kernel_p = build_kernel(grid_p, 0.5, 1.0, 0.4)
    const = np.full(128, 2.5)
    gap = np.max(np.abs(apply_full(const, kernel_p)))
    record("constants annihilated (periodic)", gap == 0.0, f"max = {gap:.2e}")

    grid_z = Grid.from_window(128, -4, 4, "zero-extension")
    kernel_z = build_kernel(grid_z, 0.5, 1.0, 0.4)
    img = apply_full(const, kernel_z)
    record("constant response nonnegative (zero-extension)",
           img.min() >= 0.0, f"min = {img.min():.3g}")

    # comparison principle: u <= v with equality at one cell
    u = rng.normal(size=128)
    bump = np.abs(rng.normal(size=128))
    i0 = 40
    bump[i0] = 0.0
    v = u + bump
    du = apply_full(u, kernel_p)[i0] - apply_full(v, kernel_p)[i0]
    record("comparison principle", du >= -1e-12, f"(Lu - Lv)_i = {du:.2e}")

    # --- quadrature oracle ----------------------------------------------
    grid = Grid.from_window(512, -8, 8, "zero-extension")
    kernel = build_kernel(grid, 0.5, 1.0, 0.5)
    x = grid.centers
    u = np.exp(-(x**2))
    lhs = apply_full(u, kernel)
    probes = range(96, 420, 36)
    oracle = np.array([_quad_oracle(lambda t: np.exp(-(t**2)), x[i], 0.5)
                       for i in probes])
    rel = np.max(np.abs(lhs[list(probes)] - oracle)) / np.max(np.abs(oracle))
    record("operator vs quadrature oracle (lam=0.5)", rel <= 1e-3,
           f"sup rel err = {rel:.2e}")

    # --- model functions --------------------------------------------------
    flux = burgers_flux(2.0)
    a = rng.uniform(-1.5, 1.5, 200)
    b = rng.uniform(-1.5, 1.5, 200)
    sym = np.max(np.abs(kruzkov_flux(a, b, flux) - kruzkov_flux(b, a, flux)))
    record("Kruzkov flux symmetry", sym <= 1e-14, f"max |gap| = {sym:.2e}")

    ep = make_eta_delta(0.05)
    gap = np.max(np.abs(entropy_flux(a, 0.3, flux, ep)
                        - kruzkov_flux(a, np.full_like(a, 0.3), flux)))
    record("entropy flux close to Kruzkov flux",
           gap <= flux.lipschitz_bound * ep.delta + 1e-12,
           f"max gap = {gap:.3e} <= Lip*delta = {flux.lipschitz_bound * ep.delta:.3e}")

    diff = ramp_diffusion(0.25, 1.0)
    gap = np.max(np.abs(a_eta_k(a, 0.1, diff, ep)
                        - np.abs(diff.a(a) - diff.a(0.1))))
    record("diffusion entropy primitive bound",
           gap <= diff.lipschitz_bound * ep.delta + 1e-12,
           f"max gap = {gap:.3e} <= delta*LipA = {diff.lipschitz_bound * ep.delta:.3e}")

    # --- noise statistics -------------------------------------------------
    path = sample_path(99, 2000, 50, 1e-3)
    inc = path.increments.ravel()
    n = inc.size
    mean_ok = abs(inc.mean()) <= 4.0 * np.sqrt(1e-3 / n)
    var_ok = abs(inc.var() / 1e-3 - 1.0) <= 0.05
    record("Wiener increment moments", mean_ok and var_ok,
           f"mean = {inc.mean():.2e}, var/dt = {inc.var() / 1e-3:.4f}")
    same = np.array_equal(sample_path(7, 64, 4, 0.01).increments,
                          sample_path(7, 64, 4, 0.01).increments)
    record("path reproducibility", same, "same seed, same increments")

    # --- transport order ---------------------------------------------------
    errs = []
    for n_cells in (64, 128, 256):
        g = Grid.from_window(n_cells, -1, 1, "periodic")
        u0 = np.sin(np.pi * g.centers)
        prob = Problem(g, linear_flux(1.0), ramp_diffusion(10.0, 0.0), None,
                       u0, lam=0.5)
        sc = SolverConfig(epsilon=0.0, t_end=0.25, mollify=False)
        dt, n_steps = resolve_dt(prob, sc)
        traj = run(prob, sc, sample_path(0, n_steps, 1, dt))
        exact = np.sin(np.pi * (((g.centers + sc.t_end) + 1) % 2 - 1))
        errs.append(g.l1(traj.snapshots[-1] - exact))
    order = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    record("transport convergence order", min(order) >= 0.8,
           f"orders = {order[0]:.2f}, {order[1]:.2f}")

    # --- mollifier ---------------------------------------------------------
    g = Grid.from_window(128, -4, 4, "zero-extension")
    u0 = np.where(np.abs(g.centers) < 1, 1.0, 0.0)
    v = mollify_initial(u0, 0.05, g)
    record("mollifier contracts L1 and TV",
           g.l1(v) <= g.l1(u0) + 1e-12 and g.tv(v) <= g.tv(u0) + 1e-12,
           f"L1 {g.l1(v):.4f} <= {g.l1(u0):.4f}, TV {g.tv(v):.4f} <= {g.tv(u0):.4f}")

    # --- determinism ---------------------------------------------------------
    g = Grid.from_window(64, -4, 4, "periodic")
    u0 = np.exp(-g.centers**2)
    prob = Problem(g, burgers_flux(2.0), ramp_diffusion(0.25, 1.0),
                   geometric_noise(0.25, 8), u0, lam=0.5)
    sc = SolverConfig(epsilon=0.05, t_end=0.1)
    dt, n_steps = resolve_dt(prob, sc)
    t1 = run(prob, sc, sample_path(3, n_steps, 8, dt))
    t2 = run(prob, sc, sample_path(3, n_steps, 8, dt))
    record("trajectory determinism",
           np.array_equal(t1.snapshots, t2.snapshots), "bit-identical rerun")

    ok = all(c["pass"] for c in checks)
    print(f"selftest: {sum(c['pass'] for c in checks)}/{len(checks)} checks passed")
    return ok, checks

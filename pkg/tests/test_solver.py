import numpy as np
import pytest

from fracshock.fractional import build_kernel
from fracshock.grid import Grid
from fracshock.model import (bump_profile, burgers_flux, identity_diffusion,
                             linear_flux, ramp_diffusion, zero_diffusion)
from fracshock.solver import (ENGQUIST_OSHER, LAX_FRIEDRICHS, Problem,
                              SolverConfig, SolverBlowupError, StabilityError,
                              Stepper, common_dt, convective_divergence,
                              mollify_initial, resolve_dt, run, run_coupled,
                              run_ensemble, stable_dt)
from fracshock.stochastic import geometric_noise, sample_path


def transport_problem(n=128, c=1.0):
    g = Grid.from_window(n, -1, 1, "periodic")
    u0 = np.sin(np.pi * g.centers)
    return Problem(g, linear_flux(c), zero_diffusion(), None, u0, lam=0.5)


class TestMollify:
    def test_zero_epsilon_is_identity(self, rng):
        g = Grid.from_window(64, -2, 2, "periodic")
        u0 = rng.normal(size=64)
        assert np.array_equal(mollify_initial(u0, 0.0, g), u0)

    def test_l1_and_tv_contract(self, rng):
        # resolvent of the discrete Laplacian is an M-matrix inverse
        for boundary in ("periodic", "zero-extension"):
            g = Grid.from_window(128, -4, 4, boundary)
            u0 = np.where(np.abs(g.centers) < 1.5, 1.0, 0.0)
            v = mollify_initial(u0, 0.08, g)
            assert g.l1(v) <= g.l1(u0) + 1e-12
            assert g.tv(v) <= g.tv(u0) + 1e-12

    def test_fourier_mode_eigenrelation(self):
        # [DERIVED] discrete symbol mu = (2 - 2 cos(w dx)) / dx^2
        g = Grid.from_window(128, 0.0, 2 * np.pi, "periodic")
        eps = 0.07
        for w in (1, 3, 7):
            u0 = np.sin(w * g.centers)
            mu = (2.0 - 2.0 * np.cos(w * g.dx)) / g.dx**2
            expected = u0 / (1.0 + eps * mu)
            assert np.allclose(mollify_initial(u0, eps, g), expected,
                               atol=1e-11)

    def test_shift_error_scales_like_sqrt_eps_for_bv_data(self):
        # the corollary hypothesis: ||u0_eps - u0||_1 = O(sqrt(eps))
        g = Grid.from_window(1024, -4, 4, "zero-extension")
        u0 = np.where(np.abs(g.centers) < 1, 1.0, 0.0)
        errs = []
        for eps in (1e-2, 2.5e-3, 6.25e-4):
            errs.append(g.l1(mollify_initial(u0, eps, g) - u0))
        rate1 = np.log(errs[0] / errs[1]) / np.log(4.0)
        rate2 = np.log(errs[1] / errs[2]) / np.log(4.0)
        assert 0.4 <= rate1 <= 0.65
        assert 0.4 <= rate2 <= 0.65


class TestStableDt:
    def test_pure_hyperbolic_limit(self):
        g = Grid.from_window(64, -1, 1, "periodic")
        k = build_kernel(g, 0.5)
        cfg = SolverConfig(epsilon=0.0, cfl_safety=0.5)
        dt = stable_dt(cfg, linear_flux(2.0), zero_diffusion(), k, g)
        assert dt == pytest.approx(0.5 * g.dx / 2.0)

    def test_fractional_term_drops_when_diffusion_off(self):
        g = Grid.from_window(64, -1, 1, "periodic")
        k = build_kernel(g, 0.9)  # huge row sum
        cfg = SolverConfig(epsilon=0.0, cfl_safety=1.0)
        dt_off = stable_dt(cfg, linear_flux(1.0), zero_diffusion(), k, g)
        dt_on = stable_dt(cfg, linear_flux(1.0), identity_diffusion(), k, g)
        assert dt_off == pytest.approx(g.dx)
        assert dt_on < dt_off

    def test_row_sum_matches_direct_summation(self):
        # [DERIVED] oracle: direct summation over the offset weights
        g = Grid.from_window(128, -4, 4, "zero-extension")
        k = build_kernel(g, 0.5)
        direct = 2.0 * k.weights_full[1:].sum() + k.tail_correction
        assert k.row_sum() == pytest.approx(direct, rel=1e-15)


class TestConvectiveDivergence:
    def test_constant_state_zero(self):
        g = Grid.from_window(64, -1, 1, "periodic")
        u = np.full(64, 0.8)
        for scheme in (ENGQUIST_OSHER, LAX_FRIEDRICHS):
            out = convective_divergence(u, burgers_flux(2.0), scheme, g)
            assert np.max(np.abs(out)) <= 1e-14

    def test_conservation_on_periodic_grid(self, rng):
        g = Grid.from_window(64, -1, 1, "periodic")
        u = rng.normal(size=64)
        for scheme in (ENGQUIST_OSHER, LAX_FRIEDRICHS):
            out = convective_divergence(u, burgers_flux(4.0), scheme, g)
            assert abs(out.sum() * g.dx) <= 1e-13

    def test_eo_upwind_hand_check_six_cells(self):
        # [DERIVED] f(u) = u, step field: interface value is the downstream
        # state for the +div orientation, q_{i+1/2} = u_{i+1}
        g = Grid.from_window(6, 0.0, 6.0, "periodic")
        u = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
        out = convective_divergence(u, linear_flux(1.0), ENGQUIST_OSHER, g)
        expected = np.array([0.0, 1.0, 0.0, -1.0, 0.0, 0.0]) / g.dx
        assert np.allclose(out, expected, atol=1e-14)

    def test_transport_approximates_exact_shift(self):
        # [DERIVED] exact solution of du/dt = c du/dx is u0(x + c t)
        prob = transport_problem(256, 1.0)
        cfg = SolverConfig(epsilon=0.0, t_end=0.5, mollify=False)
        dt, n = resolve_dt(prob, cfg)
        traj = run(prob, cfg, sample_path(0, n, 1, dt))
        g = prob.grid
        exact = np.sin(np.pi * ((g.centers + cfg.t_end + 1) % 2 - 1))
        assert g.l1(traj.snapshots[-1] - exact) <= 0.05


class TestStep:
    def test_all_terms_off_identity(self, rng):
        g = Grid.from_window(64, -1, 1, "periodic")
        u0 = rng.normal(size=64)
        prob = Problem(g, linear_flux(0.0), zero_diffusion(), None, u0, 0.5)
        stepper = Stepper(prob, SolverConfig(epsilon=0.0, t_end=0.1))
        u1 = stepper.step(u0)
        assert np.array_equal(u1, u0)

    def test_pure_fractional_l2_nonincreasing(self, rng):
        # [DERIVED] explicit-step energy identity under the stability bound
        g = Grid.from_window(128, -4, 4, "periodic")
        u0 = rng.normal(size=128)
        prob = Problem(g, linear_flux(0.0), identity_diffusion(), None, u0, 0.6)
        stepper = Stepper(prob, SolverConfig(epsilon=0.0, t_end=0.05))
        u = u0.copy()
        for _ in range(20):
            u_next = stepper.step(u)
            assert g.l2_sq(u_next) <= g.l2_sq(u) * (1 + 1e-12)
            u = u_next

    def test_stability_error_when_dt_too_large(self):
        prob = transport_problem(64)
        cfg = SolverConfig(epsilon=0.0, dt=1.0, t_end=0.5)
        with pytest.raises(StabilityError):
            Stepper(prob, cfg)

    def test_blowup_reports_step(self):
        # crafted unstable run: bypass the guard with a handmade path and a
        # flux whose declared bound underestimates reality
        g = Grid.from_window(32, -1, 1, "periodic")
        u0 = 100.0 * np.sin(np.pi * g.centers)
        flux = linear_flux(1.0)
        prob = Problem(g, flux, zero_diffusion(),
                       geometric_noise(0.25, 2), u0, 0.5)
        cfg = SolverConfig(epsilon=0.0, t_end=50.0)
        dt, n = resolve_dt(prob, cfg)
        path = sample_path(1, n, 2, dt)
        path.increments[:] = 1e155   # force overflow through the noise
        with np.errstate(over="ignore"), pytest.raises(SolverBlowupError) as exc:
            run(prob, cfg, path)
        assert "step" in str(exc.value)


class TestRunAndEnsembles:
    def base_problem(self, n=128, noise=True):
        g = Grid.from_window(n, -4, 4, "periodic")
        u0 = bump_profile(g.centers, 1.0, 0.0, 1.5)
        return Problem(g, burgers_flux(2.0), ramp_diffusion(0.25, 1.0),
                       geometric_noise(0.25, 8) if noise else None, u0, 0.5)

    def test_pathwise_determinism(self):
        prob = self.base_problem()
        cfg = SolverConfig(epsilon=0.05, t_end=0.1)
        dt, n = resolve_dt(prob, cfg)
        t1 = run(prob, cfg, sample_path(11, n, 8, dt), snapshot_times="dense")
        t2 = run(prob, cfg, sample_path(11, n, 8, dt), snapshot_times="dense")
        assert np.array_equal(t1.snapshots, t2.snapshots)

    def test_snapshot_times_subset(self):
        prob = self.base_problem(noise=False)
        cfg = SolverConfig(epsilon=0.05, t_end=0.2)
        dt, n = resolve_dt(prob, cfg)
        traj = run(prob, cfg, sample_path(0, n, 1, dt),
                   snapshot_times=[0.0, 0.1, 0.2])
        assert len(traj.times) == 3
        assert traj.times[0] == 0.0
        assert traj.times[-1] == pytest.approx(0.2)

    def test_mass_bookkeeping_over_ensemble(self):
        # periodic + linear-in-u noise: mean total mass moves only through
        # zero-mean increments
        prob = self.base_problem()
        cfg = SolverConfig(epsilon=0.05, t_end=0.2)
        summary = run_ensemble(prob, cfg, range(100, 140),
                               functionals={"mass": lambda u, g: g.mass(u)},
                               snapshot_times=[0.0, 0.2])
        m0 = summary.stats["mass"]["mean"][0]
        mT = summary.stats["mass"]["mean"][-1]
        se = summary.stats["mass"]["se"][-1]
        assert abs(mT - m0) <= 4.0 * se

    def test_thread_count_does_not_change_results(self):
        prob = self.base_problem()
        cfg = SolverConfig(epsilon=0.05, t_end=0.1)
        s1 = run_ensemble(prob, cfg, range(7), threads=1)
        s4 = run_ensemble(prob, cfg, range(7), threads=4)
        for name in s1.stats:
            assert np.array_equal(s1.stats[name]["mean"],
                                  s4.stats[name]["mean"])

    def test_coupled_runs_share_increments(self):
        # identical problems under coupling stay bit-identical
        prob = self.base_problem()
        cfg = SolverConfig(epsilon=0.05, t_end=0.1)
        res = run_coupled([(prob, cfg), (prob, cfg)], range(5),
                          snapshot_times=[0.1])
        dist = res["distances"][(0, 1)]["mean"]
        assert np.all(dist == 0.0)

    def test_common_dt_is_min_over_cases(self):
        prob = self.base_problem()
        c1 = SolverConfig(epsilon=0.2, t_end=0.1)
        c2 = SolverConfig(epsilon=0.0125, t_end=0.1)
        dt, n = common_dt([(prob, c1), (prob, c2)])
        dt1 = Stepper(prob, c1).dt_bound
        assert dt <= dt1 * (1 + 1e-12)

    def test_noise_truncation_stability(self):
        # doubling the mode count moves E||u(T)||_1 by less than the
        # statistical error of the coarser run
        cfg = SolverConfig(epsilon=0.05, t_end=0.2)
        vals = {}
        for modes in (8, 16):
            g = Grid.from_window(128, -4, 4, "periodic")
            u0 = bump_profile(g.centers, 1.0, 0.0, 1.5)
            prob = Problem(g, burgers_flux(2.0), ramp_diffusion(0.25, 1.0),
                           geometric_noise(0.25, modes), u0, 0.5)
            s = run_ensemble(prob, cfg, range(200, 248),
                             snapshot_times=[0.2])
            vals[modes] = (s.stats["l1"]["mean"][-1], s.stats["l1"]["se"][-1])
        gap = abs(vals[8][0] - vals[16][0])
        assert gap <= 4.0 * (vals[8][1] + vals[16][1])

    def test_burgers_range_guard(self):
        # solution escaping the clipped quadratic range is reported
        g = Grid.from_window(64, -2, 2, "periodic")
        u0 = 1.2 * np.ones(64)
        prob = Problem(g, burgers_flux(1.0), zero_diffusion(), None, u0, 0.5)
        cfg = SolverConfig(epsilon=0.0, t_end=0.05, mollify=False)
        dt, n = resolve_dt(prob, cfg)
        with pytest.raises(SolverBlowupError):
            run(prob, cfg, sample_path(0, n, 1, dt))

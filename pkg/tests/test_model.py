import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracshock.model import (a_eta_k, box_profile, bump_profile, burgers_flux,
                             entropy_flux, gaussian_profile,
                             identity_diffusion, kruzkov_flux, linear_flux,
                             make_eta_delta, perturbed_diffusion,
                             ramp_diffusion, saturating_diffusion,
                             zero_diffusion)

finite = st.floats(-3.0, 3.0, allow_nan=False)


def midpoint_integral(fn, a, b, n=4000):
    s = np.linspace(a, b, n + 1)
    mid = 0.5 * (s[1:] + s[:-1])
    return float(np.sum(fn(mid)) * (b - a) / n)


class TestEtaDelta:
    def test_rejects_nonpositive_delta(self):
        for d in (0.0, -0.1):
            with pytest.raises(ValueError):
                make_eta_delta(d)

    def test_matches_absolute_value_outside(self):
        ep = make_eta_delta(0.2)
        x = np.array([-2.0, -0.5, 0.5, 2.0])
        dev = np.abs(ep.eta(x) - np.abs(x))
        # |x| up to an additive constant <= delta
        assert np.allclose(dev, dev[0])
        assert dev[0] <= 0.2

    def test_second_derivative_supported_in_band(self):
        ep = make_eta_delta(0.1)
        x = np.array([-1.0, -0.1001, 0.1001, 3.0])
        assert np.all(ep.eta_double_prime(x) == 0.0)
        inside = np.linspace(-0.099, 0.099, 41)
        assert np.all(ep.eta_double_prime(inside) >= 0.0)

    def test_normalisation_and_slope(self):
        for d in (0.3, 0.05, 0.01):
            ep = make_eta_delta(d)
            assert ep.eta(0.0) == 0.0
            assert ep.eta_prime(2 * d) == 1.0
            assert ep.eta_prime(-2 * d) == -1.0
            assert abs(ep.eta_prime(0.0)) == 0.0
            x = np.linspace(-3 * d, 3 * d, 301)
            assert np.max(np.abs(ep.eta_prime(x))) <= 1.0 + 1e-14
            assert np.min(ep.eta(x)) >= -1e-14

    def test_uniform_convergence_rate(self):
        # [DERIVED] sampled sup-deviation shrinks at rate <= delta
        x = np.linspace(-1, 1, 2001)
        for d in (0.1, 0.05, 0.025):
            ep = make_eta_delta(d)
            assert np.max(np.abs(ep.eta(x) - np.abs(x))) <= d

    def test_derivative_consistency_by_finite_differences(self):
        # [DERIVED] oracle: centered finite differences of eta, keeping the
        # stencil away from the C^2 matching points at +-delta
        ep = make_eta_delta(0.2)
        x = np.linspace(-0.5, 0.5, 101)
        x = x[np.abs(np.abs(x) - ep.delta) > 1e-4]
        h = 1e-6
        fd = (ep.eta(x + h) - ep.eta(x - h)) / (2 * h)
        assert np.max(np.abs(fd - ep.eta_prime(x))) <= 1e-8
        fd2 = (ep.eta_prime(x + h) - ep.eta_prime(x - h)) / (2 * h)
        assert np.max(np.abs(fd2 - ep.eta_double_prime(x))) <= 1e-6


class TestKruzkovFlux:
    def test_vanishes_on_diagonal(self):
        flux = burgers_flux(2.0)
        for a in (-1.0, 0.0, 0.7):
            assert kruzkov_flux(a, a, flux) == 0.0

    def test_quadratic_flux_value(self):
        # f(u) = u^2/2: F(2, 1) = sign(1) (2 - 1/2) = 3/2
        flux = burgers_flux(3.0)
        assert kruzkov_flux(2.0, 1.0, flux) == pytest.approx(1.5, abs=1e-14)

    @settings(max_examples=80, deadline=None)
    @given(finite, finite)
    def test_symmetry(self, a, b):
        flux = burgers_flux(4.0)
        assert kruzkov_flux(a, b, flux) == kruzkov_flux(b, a, flux)

    @settings(max_examples=50, deadline=None)
    @given(finite, finite)
    def test_lipschitz_in_each_argument(self, a, b):
        flux = burgers_flux(4.0)
        base = kruzkov_flux(a, b, flux)
        h = 0.125
        assert abs(kruzkov_flux(a + h, b, flux) - base) \
            <= flux.lipschitz_bound * h + 1e-12


class TestEntropyFlux:
    def test_vanishes_at_k(self):
        flux = linear_flux(2.0)
        ep = make_eta_delta(0.1)
        assert entropy_flux(0.4, 0.4, flux, ep) == pytest.approx(0.0, abs=1e-15)

    def test_close_to_kruzkov_flux(self, rng):
        # [DERIVED] |Feta - F| <= Lip(f) * delta, sampled
        flux = burgers_flux(2.0)
        ep = make_eta_delta(0.08)
        a = rng.uniform(-1.8, 1.8, 400)
        k = rng.uniform(-1.8, 1.8, 400)
        gap = np.abs(entropy_flux(a, 0.3, flux, ep)
                     - kruzkov_flux(a, np.full_like(a, 0.3), flux))
        assert np.max(gap) <= flux.lipschitz_bound * ep.delta + 1e-12

    def test_linear_flux_closed_form(self):
        # [DERIVED] f = c u, a > k + delta:
        # Feta(a,k) = c (a-k) - c int_k^{k+delta} (1 - eta'(s-k)) ds
        c, d, k = 1.5, 0.2, 0.1
        flux = linear_flux(c)
        ep = make_eta_delta(d)
        a = k + 3 * d
        corr = midpoint_integral(lambda s: 1.0 - ep.eta_prime(s - k),
                                 k, k + d)
        expected = c * (a - k) - c * corr
        assert entropy_flux(a, k, flux, ep) == pytest.approx(expected, abs=1e-8)

    def test_matches_direct_quadrature(self, rng):
        # [DERIVED] oracle: dense midpoint quadrature of the definition
        flux = burgers_flux(2.0)
        ep = make_eta_delta(0.15)
        k = -0.2
        for a in rng.uniform(-1.5, 1.5, 12):
            ref = midpoint_integral(
                lambda s: ep.eta_prime(s - k) * flux.f_prime(s), k, a)
            assert entropy_flux(a, k, flux, ep) == pytest.approx(ref, abs=2e-7)


class TestAEtaK:
    def test_vanishes_at_k(self):
        diff = identity_diffusion()
        ep = make_eta_delta(0.1)
        assert a_eta_k(0.7, 0.7, diff, ep) == pytest.approx(0.0, abs=1e-15)

    def test_absolute_difference_bound(self, rng):
        # sampled |Aeta_k(a) - |A(a) - A(k)|| <= delta ||A'||_inf
        diff = saturating_diffusion(1.5, 0.8)
        ep = make_eta_delta(0.06)
        a = rng.uniform(-2, 2, 300)
        for k in (-0.5, 0.0, 0.8):
            gap = np.abs(a_eta_k(a, k, diff, ep)
                         - np.abs(diff.a(a) - diff.a(k)))
            assert np.max(gap) <= ep.delta * diff.lipschitz_bound + 1e-12

    def test_identity_diffusion_matches_quadrature(self):
        # [DERIVED] A = id, a = k + 2 delta, dense quadrature oracle
        diff = identity_diffusion()
        d, k = 0.1, 0.3
        ep = make_eta_delta(d)
        a = k + 2 * d
        ref = midpoint_integral(lambda s: ep.eta_prime(s - k), k, a)
        assert a_eta_k(a, k, diff, ep) == pytest.approx(ref, abs=1e-8)


class TestFluxLibrary:
    def test_zero_at_origin_and_lipschitz(self, rng):
        for flux in (linear_flux(1.3), linear_flux(-0.7), burgers_flux(2.0)):
            assert flux.f(0.0) == 0.0
            u = rng.uniform(-2.5, 2.5, 200)
            v = rng.uniform(-2.5, 2.5, 200)
            assert np.all(np.abs(flux.f(u) - flux.f(v))
                          <= flux.lipschitz_bound * np.abs(u - v) + 1e-12)

    def test_burgers_quadratic_inside_clip(self):
        flux = burgers_flux(2.0)
        u = np.linspace(-1.9, 1.9, 101)
        assert np.allclose(flux.f(u), 0.5 * u * u, atol=1e-14)
        assert np.allclose(flux.f_prime(u), u, atol=1e-14)

    def test_eo_primitives_sum_to_flux(self, rng):
        # q(a, a) consistency relies on eo_pos + eo_neg = f
        for flux in (linear_flux(1.0), linear_flux(-2.0), burgers_flux(1.5)):
            v = rng.uniform(-3, 3, 200)
            total = flux.eo_pos(v) + flux.eo_neg(v)
            assert np.allclose(total, flux.f(v), atol=1e-13)

    def test_eo_primitives_match_quadrature(self):
        # [DERIVED] oracle: dense midpoint quadrature of (f')^{+-}
        flux = burgers_flux(1.5)
        for v in (-2.5, -0.8, 0.4, 2.2):
            pos = midpoint_integral(
                lambda s: np.maximum(flux.f_prime(s), 0.0), 0.0, v)
            neg = midpoint_integral(
                lambda s: np.minimum(flux.f_prime(s), 0.0), 0.0, v)
            assert flux.eo_pos(v) == pytest.approx(pos, abs=1e-6)
            assert flux.eo_neg(v) == pytest.approx(neg, abs=1e-6)


class TestDiffusionLibrary:
    def test_zero_at_origin_and_monotone(self, rng):
        u = np.linspace(-4, 4, 10_000)
        for diff in (zero_diffusion(), identity_diffusion(0.7),
                     ramp_diffusion(0.25, 1.2), saturating_diffusion(1.0, 0.5),
                     perturbed_diffusion(ramp_diffusion(0.25, 1.0), 0.125)):
            assert diff.a(0.0) == pytest.approx(0.0, abs=1e-15)
            assert np.min(diff.a_prime(u)) >= -1e-12
            v = rng.uniform(-4, 4, 500)
            w = rng.uniform(-4, 4, 500)
            assert np.all(np.abs(diff.a(v) - diff.a(w))
                          <= diff.lipschitz_bound * np.abs(v - w) + 1e-12)

    def test_ramp_degenerate_region(self):
        diff = ramp_diffusion(0.25, 1.0)
        u = np.linspace(-1, 0.24, 50)
        assert np.all(diff.a(u) == 0.0)

    def test_perturbation_sup_norm_is_exact(self):
        base = ramp_diffusion(0.25, 1.0)
        for d in (0.25, 0.0625):
            pert = perturbed_diffusion(base, d)
            u = np.linspace(-6, 6, 20_001)
            gap = np.abs(pert.a_prime(u) - base.a_prime(u))
            assert np.max(gap) == pytest.approx(d, rel=1e-6)


class TestProfiles:
    def test_compact_support_and_tv(self):
        x = np.linspace(-8, 8, 1601)
        dx = x[1] - x[0]
        b = bump_profile(x, 1.0, 0.0, 2.0)
        assert np.all(b[np.abs(x) >= 2.0] == 0.0)
        assert b.max() == pytest.approx(1.0)
        tv = np.abs(np.diff(b)).sum()
        assert tv == pytest.approx(2.0, abs=1e-3)
        assert np.all(box_profile(x, 2.0, 1.0, 0.5)[np.abs(x - 1.0) >= 0.5] == 0)
        assert gaussian_profile(x, 1.0, 0.0, 1.0).max() == pytest.approx(1.0)

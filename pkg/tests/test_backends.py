import numpy as np
import pytest

from fracshock import _kernels_py

try:
    from fracshock import _kernels as _compiled
except ImportError:
    _compiled = None

needs_compiled = pytest.mark.skipif(_compiled is None,
                                    reason="compiled extension not built")


@needs_compiled
class TestBackendAgreement:
    def cases(self, rng):
        n = 96
        w = np.abs(rng.normal(size=n // 2 + 1))
        w[0] = 0.0
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        return u, v, w

    def test_nonlocal_apply_matches(self, rng):
        u, v, w = self.cases(rng)
        for periodic in (True, False):
            for tail in (0.0, 0.37):
                if periodic and tail:
                    continue
                out_c = np.empty_like(u)
                out_p = np.empty_like(u)
                _compiled.nonlocal_apply(u, w, tail, periodic, out_c)
                _kernels_py.nonlocal_apply(u, w, tail, periodic, out_p)
                assert np.allclose(out_c, out_p, rtol=1e-13, atol=1e-13)

    def test_pair_sum_matches(self, rng):
        u, v, w = self.cases(rng)
        for periodic in (True, False):
            for tail in (0.0, 0.5):
                if periodic and tail:
                    continue
                a = _compiled.pair_sum(u, v, w, tail, periodic)
                b = _kernels_py.pair_sum(u, v, w, tail, periodic)
                assert a == pytest.approx(b, rel=1e-12)

    def test_pair_sum_equals_weighted_inner_product(self, rng):
        # cross-check both backends against the operator duality
        u, v, w = self.cases(rng)
        out = np.empty_like(u)
        _compiled.nonlocal_apply(u, w, 0.2, False, out)
        dual = float(out @ v)
        assert _compiled.pair_sum(u, v, w, 0.2, False) == \
            pytest.approx(dual, rel=1e-11)
        assert _kernels_py.pair_sum(u, v, w, 0.2, False) == \
            pytest.approx(dual, rel=1e-11)

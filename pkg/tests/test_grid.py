import numpy as np
import pytest

from fracshock.grid import Grid


def test_invariants_enforced():
    with pytest.raises(ValueError):
        Grid(3, 0.1, 0.0)
    with pytest.raises(ValueError):
        Grid(8, -0.1, 0.0)
    with pytest.raises(ValueError):
        Grid(8, 0.1, 0.0, boundary="reflect")


def test_centers_strictly_increasing():
    g = Grid.from_window(32, -2.0, 2.0)
    x = g.centers
    assert np.all(np.diff(x) > 0)
    assert x[0] == pytest.approx(g.x_min + 0.5 * g.dx)
    assert g.x_max == pytest.approx(2.0)


def test_norms_and_tv():
    g = Grid.from_window(8, 0.0, 8.0, "zero-extension")
    u = np.array([0.0, 1.0, 1.0, -2.0, 0.0, 0.0, 3.0, 0.0])
    assert g.l1(u) == pytest.approx(7.0)
    assert g.mass(u) == pytest.approx(3.0)
    assert g.l2_sq(u) == pytest.approx(15.0)
    assert g.tv(u) == pytest.approx(0 + 1 + 0 + 3 + 2 + 0 + 3 + 3)


def test_tv_wraps_only_when_periodic():
    u = np.array([1.0, 0.0, 0.0, 0.0])
    gp = Grid.from_window(4, 0.0, 4.0, "periodic")
    gz = Grid.from_window(4, 0.0, 4.0, "zero-extension")
    assert gp.tv(u) == pytest.approx(2.0)
    assert gz.tv(u) == pytest.approx(1.0)


def test_tv_zero_iff_constant():
    g = Grid.from_window(16, 0.0, 1.0)
    assert g.tv(np.full(16, 2.7)) == 0.0
    u = np.full(16, 2.7)
    u[5] += 1e-9
    assert g.tv(u) > 0.0

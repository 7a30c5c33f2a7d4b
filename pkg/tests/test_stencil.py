import numpy as np
import pytest

from cclab import _stencil


def test_weights_annihilate_constants():
    assert _stencil.D1.sum() == 0
    assert _stencil.D2.sum() == 0
    assert _stencil.D2_6.sum() == 0


@pytest.mark.parametrize("order", [4, 6])
def test_mixed_fourth_on_polynomials(order):
    h = 0.1
    n = _stencil.nodes(order) * h
    s, t = np.meshgrid(n, n, indexing="ij")
    grid = 3 * s**2 * t**2 + s**4 + t**3 - 7 * s * t + 2
    value, coarse, fine = _stencil.mixed_fourth(grid, h, order)
    assert value == pytest.approx(12.0, abs=1e-9)
    assert coarse == pytest.approx(12.0, abs=1e-9)


def test_mixed_fourth_richardson_improves():
    h = 0.2
    n = _stencil.nodes() * h
    s, t = np.meshgrid(n, n, indexing="ij")
    grid = np.exp(s) * np.sin(1 + t)
    value, coarse, fine = _stencil.mixed_fourth(grid, h)
    exact = -np.sin(1.0)
    assert abs(value - exact) < abs(fine - exact) < abs(coarse - exact)


def test_first_derivative_and_mixed_second():
    assert _stencil.first_derivative(np.sin, 1e-2) == pytest.approx(1.0, abs=1e-9)
    h = 1e-2
    o = _stencil.OFFSETS5 * h
    grid = np.exp(o[:, None] * 2) * np.cos(o[None, :] + 0.3)
    assert _stencil.mixed_second(grid, h) == pytest.approx(-2 * np.sin(0.3), abs=1e-8)


def test_reach():
    assert _stencil.reach(4) == 2.0
    assert _stencil.reach(6) == 3.0

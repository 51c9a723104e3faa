import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.interpolate import BSpline
from scipy.signal import fftconvolve

from bsiac import bspline_eval, bspline_knots, bspline_moment


def box_convolution_grid(order, x, n=200_001):
    """B^(order) at x by repeated numerical convolution of the unit box."""
    grid = np.linspace(-order / 2, order / 2, n)
    dx = grid[1] - grid[0]
    box = ((grid >= -0.5) & (grid < 0.5)).astype(float)
    f = box.copy()
    for _ in range(order - 1):
        f = fftconvolve(f, box, mode="same") * dx
    return float(np.interp(x, grid, f))


def fine_grid_moment(order, shift, m, n=1_000_000):
    """Composite midpoint rule on 10^6 cells (no endpoint sampling of jumps)."""
    edges = np.linspace(shift - order / 2, shift + order / 2, n + 1)
    x = 0.5 * (edges[1:] + edges[:-1])
    return float(np.sum(bspline_eval(order, x - shift) * x**m) * (edges[1] - edges[0]))


def test_small_values():
    assert bspline_eval(1, 0.0) == 1.0
    assert bspline_eval(2, 0.0) == 1.0
    assert bspline_eval(2, 1.0) == 0.0 and bspline_eval(2, -1.0) == 0.0
    assert bspline_eval(3, 0.0) == pytest.approx(0.75, abs=1e-14)


def test_quadratic_peak_against_numerical_convolution():
    assert bspline_eval(3, 0.0) == pytest.approx(box_convolution_grid(3, 0.0), abs=1e-4)
    assert bspline_eval(4, 0.3) == pytest.approx(box_convolution_grid(4, 0.3), abs=1e-4)


def test_knots():
    assert list(bspline_knots(1)) == [-0.5, 0.5]
    assert list(bspline_knots(2)) == [-1, 0, 1]
    assert list(bspline_knots(4)) == [-2, -1, 0, 1, 2]


@pytest.mark.parametrize("order", range(1, 8))
def test_matches_scipy_basis_element(order):
    x = np.random.default_rng(order).uniform(-order / 2 + 1e-9, order / 2 - 1e-9, 500)
    ref = BSpline.basis_element(bspline_knots(order), extrapolate=False)(x)
    np.testing.assert_allclose(bspline_eval(order, x), ref, atol=1e-13)


@pytest.mark.parametrize("order", range(1, 9))
def test_nonnegative_compact_support(order):
    x = np.random.default_rng(0).uniform(-6, 6, 1000)
    v = bspline_eval(order, x)
    assert np.all(v >= 0)
    assert np.all(v[np.abs(x) > order / 2] == 0)


@pytest.mark.parametrize("order", range(1, 7))
def test_partition_of_unity(order):
    x = np.linspace(0, 1, 101)
    total = sum(bspline_eval(order, x - i) for i in range(-order - 1, order + 2))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_moment_examples():
    assert bspline_moment(1, 0.0, 0) == pytest.approx(1.0, abs=1e-15)
    assert bspline_moment(2, 0.0, 1) == pytest.approx(0.0, abs=1e-15)
    assert bspline_moment(2, 1.0, 1) == pytest.approx(1.0, abs=1e-14)
    assert fine_grid_moment(2, 1.0, 1) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("order", range(1, 9))
@pytest.mark.parametrize("m", [1, 3, 5, 7])
def test_odd_central_moments_vanish(order, m):
    assert abs(bspline_moment(order, 0.0, m)) <= 1e-12


@pytest.mark.parametrize("order,shift,m", [(1, 0.3, 2), (2, -1.5, 3), (3, 0.5, 4), (4, 2.0, 2), (5, -0.7, 5)])
def test_moment_against_fine_grid(order, shift, m):
    assert bspline_moment(order, shift, m) == pytest.approx(fine_grid_moment(order, shift, m), abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(order=st.integers(1, 8), shift=st.floats(-3, 3), m=st.integers(0, 6))
def test_moment_shift_expansion(order, shift, m):
    # int B(x - s) x^m dx = sum_j binom(m, j) s^(m-j) mu_j
    from math import comb
    expected = sum(comb(m, j) * shift ** (m - j) * bspline_moment(order, 0.0, j) for j in range(m + 1))
    assert bspline_moment(order, shift, m) == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        bspline_eval(0, 0.0)
    with pytest.raises(ValueError):
        bspline_knots(-1)
    with pytest.raises(ValueError):
        bspline_moment(2, 0.0, -1)

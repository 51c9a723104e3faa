import numpy as np
import pytest

from bsiac import BayesSiacModel, BcdOptions, bcd_map, build_filter_matrix, build_kernel, dg_l2_error, dg_solve
from bsiac import identity_operator
from bsiac.datasets import advection_initial
from bsiac.dg import DgSolution, IntegrationError, dg_rhs, _Operators
from bsiac.mesh import Layout, build_mesh

from conftest import observed_rates

CELLS = [16, 32, 64, 128]


def shifted_exact(t, a=0.0, b=2.0):
    return lambda x: advection_initial(np.mod(np.asarray(x) - t - a, b - a) + a)


def test_constant_state_preserved():
    sol = dg_solve(10, 2, 0.77, initial=lambda x: np.full_like(x, 3.25))
    np.testing.assert_allclose(sol.values, 3.25, atol=1e-13)
    assert sol.time == 0.77


def test_full_period_on_unit_interval_returns_initial_shape():
    sol = dg_solve(32, 2, 1.0, initial=lambda x: np.sin(2 * np.pi * x))
    assert dg_l2_error(sol, lambda x: np.sin(2 * np.pi * x)) < 1e-4


def test_conservation():
    init = lambda x: np.exp(np.sin(2 * np.pi * x))
    s0 = dg_solve(20, 3, 1e-9, initial=init)
    s1 = dg_solve(20, 3, 0.37, initial=init)
    total0, total1 = s0.cell_integrals().sum(), s1.cell_integrals().sum()
    assert abs(total1 - total0) <= 1e-10 * abs(total0)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_dg_rate(k):
    errs = [dg_l2_error(dg_solve(J, k, 1.0, initial=advection_initial, a=0.0, b=2.0), shifted_exact(1.0))
            for J in CELLS]
    rates = observed_rates(CELLS, errs)
    assert np.all(np.abs(rates - (k + 1)) <= 0.2)


@pytest.mark.parametrize("k", [1, 2])
def test_post_processing_rates(k):
    dg_err, siac_err, bayes_err = [], [], []
    exact = shifted_exact(1.0)
    for J in CELLS:
        sol = dg_solve(J, k, 1.0, initial=advection_initial, a=0.0, b=2.0)
        xe = exact(np.array(sol.mesh.nodes))
        F = build_filter_matrix(sol.mesh, build_kernel(2 * k, k + 1))
        siac_err.append(sol.mesh.nodal_l2(F.matvec(sol.nodal) - xe))
        model = BayesSiacModel(identity_operator(sol.mesh.size), sol.nodal, F)
        u = bcd_map(model, BcdOptions(u0=np.zeros(sol.mesh.size))).u
        bayes_err.append(sol.mesh.nodal_l2(u - xe))
        dg_err.append(dg_l2_error(sol, exact))
    assert np.min(observed_rates(CELLS, siac_err)) >= 2 * k + 0.5
    assert np.all(np.array(bayes_err) <= np.array(dg_err))
    assert np.max(observed_rates(CELLS, bayes_err)) < 2 * k + 0.5
    assert np.all(np.array(siac_err) < np.array(dg_err))


def test_l2_error_polynomial_exactness():
    mesh = build_mesh(0, 1, 5, 3, Layout.GAUSS_LEGENDRE)
    p = lambda x: 1 - 2 * x + 3 * x**3
    sol = DgSolution(mesh, p(np.array(mesh.nodes)).reshape(5, 4), 0.0)
    assert dg_l2_error(sol, p) <= 1e-12


def test_l2_error_zero():
    mesh = build_mesh(0, 1, 4, 2, Layout.GAUSS_LEGENDRE)
    sol = DgSolution(mesh, np.zeros((4, 3)), 0.0)
    assert dg_l2_error(sol, lambda x: np.zeros_like(x)) == 0.0


def test_l2_error_against_fine_quadrature():
    from bsiac.mesh import lagrange_basis
    J, k = 64, 3
    mesh = build_mesh(0, 1, J, k, Layout.GAUSS_LEGENDRE)
    f = lambda x: np.sin(2 * np.pi * x)
    sol = DgSolution(mesh, f(np.array(mesh.nodes)).reshape(J, k + 1), 0.0)
    # midpoint rule with 400 points per cell
    s = (np.arange(400) + 0.5) / 400
    phi = lagrange_basis(mesh.ref_nodes(), s)
    x = (np.arange(J)[:, None] + s[None, :]) / J
    ref = np.sqrt(np.sum((sol.values @ phi.T - f(x)) ** 2) / (J * 400))
    assert dg_l2_error(sol, f) == pytest.approx(ref, rel=1e-3)
    assert ref < 1e-7  # interpolation error of order h^(k+1)


def test_rhs_of_linear_function_is_minus_slope():
    ops = _Operators(2)
    mesh = build_mesh(0, 1, 8, 2, Layout.GAUSS_LEGENDRE)
    # periodic hat-free check: interior cells of u = x have du/dt = -1 away from the wrap
    u = np.array(mesh.nodes).reshape(8, 3)
    rhs = dg_rhs(u, ops, mesh.cell_width)
    np.testing.assert_allclose(rhs[1:], -1.0, atol=1e-12)


def test_blow_up_detected():
    with pytest.raises(IntegrationError):
        dg_solve(8, 1, 50.0, cfl=1.0, initial=lambda x: np.sin(2 * np.pi * x))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        dg_solve(1, 1, 1.0, initial=np.sin)
    with pytest.raises(ValueError):
        dg_solve(8, 7, 1.0, initial=np.sin)
    with pytest.raises(ValueError):
        dg_solve(8, 1, 0.0, initial=np.sin)
    with pytest.raises(ValueError):
        dg_solve(8, 1, 1.0)

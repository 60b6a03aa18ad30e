import numpy as np
import pytest
from scipy.integrate import quad

from rel_energy_lab.exact_solutions import (
    IncompressibleSolution2D, StrongSolution1D, constant_strong, incompressible_eval, reference_strong,
    residual_check, rest, shear, translating_vortex, velocity_gradient, vortex, vortex_pressure,
)
from rel_energy_lab.fv_solver import Grid1D, SolverConfig, bump_field, constant_field


def _strip(y):
    return y + np.maximum(y - 2.0, 0.0) ** 2


def _strip_derivative(y):
    return 1.0 + 2.0 * np.maximum(y - 2.0, 0.0)


CATALOG = {
    'rest': rest(),
    'shear': shear(_strip, _strip_derivative),
    'vortex': vortex(1.0),
    'translating_vortex': translating_vortex((2.0, 0.0), 1.0, (-1.0, 0.5)),
}


def test_constant_strong_evaluate():
    s = constant_strong(1.5, -0.2)
    R, U = s.evaluate(np.linspace(0, 1, 5), 3.0)
    np.testing.assert_array_equal(R, 1.5)
    np.testing.assert_array_equal(U, -0.2)
    assert s.smooth


def test_strong_solution_validation():
    with pytest.raises(ValueError):
        StrongSolution1D('exact')
    with pytest.raises(ValueError):
        StrongSolution1D('reference')


def test_reference_of_constant_data_is_exact():
    grid = Grid1D(-1.0, 1.0, 20)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.1, snapshot_dt=0.05)
    s = reference_strong(constant_field(grid, 1.2, 0.3), 9, cfg)
    assert s.kind == 'constant'
    np.testing.assert_allclose([s.rho_bar, s.vel_bar], [1.2, 0.3])


def test_reference_rejects_low_refinement():
    grid = Grid1D(-1.0, 1.0, 20)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.1, snapshot_dt=0.05)
    with pytest.raises(ValueError):
        reference_strong(bump_field(grid, (1.0, 0.0), 0.1, 0.5), 4, cfg)


def test_reference_smooth_bump():
    grid = Grid1D(-4.0, 4.0, 50)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.2, snapshot_dt=0.05)
    s = reference_strong(
        bump_field(grid, (1.0, 0.0), 0.2, 1.0), 9, cfg,
        fine_init=lambda fine: bump_field(fine, (1.0, 0.0), 0.2, 1.0),
    )
    assert s.kind == 'reference' and s.smooth
    assert s.trajectory.grid.n_cells == 450
    np.testing.assert_allclose(s.times, [0.0, 0.05, 0.1, 0.15, 0.2])

    # odd refinement puts every weak centre on a fine centre
    R, U = s.evaluate(grid.centers, 0.0)
    np.testing.assert_allclose(R, bump_field(grid, (1.0, 0.0), 0.2, 1.0).rho, atol=1e-14)
    np.testing.assert_allclose(U, 0.0, atol=1e-14)

    R_mid, _ = s.evaluate(grid.centers, 0.075)
    R_lo, _ = s.evaluate(grid.centers, 0.05)
    R_hi, _ = s.evaluate(grid.centers, 0.1)
    np.testing.assert_allclose(R_mid, 0.5 * (R_lo + R_hi), rtol=1e-12)
    with pytest.raises(ValueError):
        s.evaluate(grid.centers, 0.3)


def test_reference_steep_bump_loses_smoothness():
    grid = Grid1D(-1.0, 1.0, 100)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=1.0, snapshot_dt=0.1)
    s = reference_strong(
        bump_field(grid, (1.0, 0.0), 1.0, 0.5), 32, cfg,
        fine_init=lambda fine: bump_field(fine, (1.0, 0.0), 1.0, 0.5),
    )
    assert not s.smooth
    assert s.monitor_ratio > 5.0


@pytest.mark.parametrize('kind', ['spiral', 'shear'])
def test_incompressible_validation(kind):
    with pytest.raises(ValueError):
        IncompressibleSolution2D(kind)


def test_rest_and_shear_values():
    U, P = incompressible_eval(rest(), np.array([[0.3, -1.0]]), 0.5)
    np.testing.assert_array_equal(U, 0.0)
    np.testing.assert_array_equal(P, 0.0)
    U, P = incompressible_eval(shear(lambda y: y, np.ones_like), np.array([0.0, 2.0]), 0.0)
    np.testing.assert_allclose(U, [2.0, 0.0])
    assert P == 0.0


def test_vortex_velocity_and_pressure():
    s = vortex(1.0)
    U, P = incompressible_eval(s, np.array([[1.5, 0.0], [0.5, 0.0], [0.0, 0.5]]), 0.0)
    np.testing.assert_allclose(U[0], [0.0, 0.0])
    # v(r) = r (1 - r^2)^2 counter-clockwise
    np.testing.assert_allclose(U[1], [0.0, 0.5 * 0.75 ** 2])
    np.testing.assert_allclose(U[2], [-0.5 * 0.75 ** 2, 0.0])
    np.testing.assert_allclose(P[0], 0.1)


@pytest.mark.parametrize('r', [0.2, 0.7, 1.0])
def test_vortex_pressure_matches_quadrature(r):
    expected, _ = quad(lambda s: s * (1 - s ** 2) ** 4, 0.0, r)
    np.testing.assert_allclose(vortex_pressure(r, 1.0), expected, rtol=1e-10)
    np.testing.assert_allclose(vortex_pressure(r, 3.0), 9.0 * expected, rtol=1e-10)


def test_translating_vortex_moves():
    s = translating_vortex((2.0, 0.0), 1.0, (0.0, 0.0))
    U0, P0 = incompressible_eval(s, np.array([0.5, 0.0]), 0.0)
    U1, P1 = incompressible_eval(s, np.array([1.5, 0.0]), 0.5)
    np.testing.assert_allclose(U0, U1)
    np.testing.assert_allclose(P0, P1)
    U_far, _ = incompressible_eval(s, np.array([5.0, 5.0]), 0.0)
    np.testing.assert_allclose(U_far, [2.0, 0.0])


@pytest.mark.parametrize('name', sorted(CATALOG))
def test_catalog_solves_euler(name, rng):
    assert residual_check(CATALOG[name], 10_000, rng) <= 1e-6


@pytest.mark.parametrize('name', ['shear', 'vortex', 'translating_vortex'])
def test_velocity_gradient_matches_differences(name, rng):
    s = CATALOG[name]
    x = np.stack([rng.uniform(-1.5, 1.5, 200), rng.uniform(-1.5, 1.5, 200)], axis=-1)
    t = 0.3
    h = 1e-6
    G = velocity_gradient(s, x, t)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (incompressible_eval(s, x + e, t)[0] - incompressible_eval(s, x - e, t)[0]) / (2 * h)
        np.testing.assert_allclose(G[..., :, j], fd, atol=1e-6)
    np.testing.assert_allclose(np.trace(G, axis1=-2, axis2=-1), 0.0, atol=1e-14)


def test_residual_check_needs_samples():
    with pytest.raises(ValueError):
        residual_check(rest(), 0)



def test_residual_check_is_repeatable_without_generator():
    assert residual_check(vortex(), 500) == residual_check(vortex(), 500)

import numpy as np
import pytest

from rel_energy_lab.core.errors import DomainCoverageError, DomainError, NumericalBlowupError
from rel_energy_lab.diagnostics import admissibility_report
from rel_energy_lab.fv_solver import (
    ConservedState, Field, Grid1D, SolverConfig, Trajectory, bump_field, constant_field, llf_interface_flux,
    physical_flux, read_trajectory, simulate, step, write_trajectory,
)


@pytest.mark.parametrize('args', [(-1.0, 1.0, 3), (1.0, 1.0, 10), (0.0, 1.0, 10, 'reflect')])
def test_grid_validation(args):
    with pytest.raises(ValueError):
        Grid1D(*args)


def test_grid_geometry():
    grid = Grid1D(-1.0, 1.0, 4)
    assert grid.dx == 0.5
    np.testing.assert_allclose(grid.centers, [-0.75, -0.25, 0.25, 0.75])
    assert grid.refined(9).n_cells == 36


@pytest.mark.parametrize('kwargs', [{'cfl': 0.6}, {'cfl': 0.0}, {'gamma': 1.0}, {'t_end': 0.0}, {'snapshot_dt': -1.0}])
def test_solver_config_validation(kwargs):
    values = dict(cfl=0.45, gamma=2.0, t_end=1.0, snapshot_dt=0.1)
    values.update(kwargs)
    with pytest.raises(ValueError):
        SolverConfig(**values)


def test_conserved_state_validation():
    with pytest.raises(DomainError):
        ConservedState(-1.0, 0.0)
    with pytest.raises(DomainError):
        ConservedState(0.0, 1.0)
    with pytest.raises(DomainError):
        ConservedState(np.ones(3), np.ones(2))


def test_field_is_read_only(grid):
    f = constant_field(grid, 1.0, 0.5)
    with pytest.raises(ValueError):
        f.rho[0] = 2.0
    with pytest.raises(DomainError):
        Field(grid, np.ones(10), np.zeros(10))


def test_physical_flux_example(gas):
    mass, mom = physical_flux(ConservedState(2.0, 1.0), gas)
    np.testing.assert_allclose(mass, 1.0)
    np.testing.assert_allclose(mom, 0.5 + 4.0)


def test_physical_flux_vacuum(gas):
    mass, mom = physical_flux(ConservedState(0.0, 0.0), gas)
    assert mass == 0.0 and mom == 0.0


def test_llf_consistency(gas, rng):
    s = ConservedState(rng.uniform(0.5, 2.0, 50), rng.uniform(-1.0, 1.0, 50))
    f_mass, f_mom, lam = llf_interface_flux(s, s, gas)
    mass, mom = physical_flux(s, gas)
    np.testing.assert_allclose(f_mass, mass)
    np.testing.assert_allclose(f_mom, mom)
    np.testing.assert_allclose(lam, np.abs(s.velocity()) + np.sqrt(2.0 * s.rho))


def test_step_keeps_constant_state(grid, solver):
    f = constant_field(grid, 1.3, 0.4)
    new, production = step(f, solver)
    np.testing.assert_allclose(new.rho, f.rho, rtol=1e-14)
    np.testing.assert_allclose(new.mom, f.mom, rtol=1e-14)
    assert new.time > 0
    assert np.max(np.abs(production)) <= 1e-10


def test_simulate_lands_on_snapshots(grid):
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.3, snapshot_dt=0.1)
    traj = simulate(bump_field(grid, (1.0, 0.0), 0.2, 1.0), cfg)
    np.testing.assert_array_equal(traj.times, [0.0, 0.1, 0.2, 0.3])
    assert np.all(np.diff(traj.step_times) > 0)
    assert traj.step_times[-1] == 0.3


def test_simulate_conserves_mass_and_dissipates_energy(grid, gas):
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.6, snapshot_dt=0.1)
    traj = simulate(bump_field(grid, (1.0, 0.1), 0.3, 1.0), cfg)
    mass = np.array([f.total_mass() for f in traj])
    energy = np.array([f.total_energy(gas) for f in traj])
    np.testing.assert_allclose(mass, mass[0], rtol=1e-12)
    assert np.all(np.diff(energy) <= 1e-12 * energy[0])
    assert admissibility_report(traj) <= 1e-10


def test_simulate_mirror_symmetry(grid):
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.5, snapshot_dt=0.25)
    final = simulate(bump_field(grid, (1.0, 0.0), 0.5, 1.0), cfg)[-1]
    np.testing.assert_allclose(final.rho, final.rho[::-1], atol=1e-13)
    np.testing.assert_allclose(final.mom, -final.mom[::-1], atol=1e-13)


def test_simulate_with_vacuum_region():
    grid = Grid1D(-3.0, 3.0, 150, 'copy-out')
    rho = np.where(np.abs(grid.centers) < 1.0, 1.0, 0.0)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.2, snapshot_dt=0.1)
    traj = simulate(Field(grid, rho, np.zeros_like(rho)), cfg)
    final = traj[-1]
    assert np.all(final.rho >= 0)
    assert np.all(final.mom[final.rho <= cfg.vacuum_eps] == 0)
    np.testing.assert_allclose(final.total_mass(), traj[0].total_mass(), rtol=1e-12)
    assert traj.clipped_mass <= 1e-12 * traj[0].total_mass()


def test_copy_out_boundary_reached():
    grid = Grid1D(-2.0, 2.0, 100, 'copy-out')
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=2.0, snapshot_dt=0.5)
    with pytest.raises(DomainCoverageError):
        simulate(bump_field(grid, (1.0, 0.0), 0.1, 1.0), cfg)


def test_blowup_reports_cell():
    grid = Grid1D(0.0, 1.0, 10)
    cfg = SolverConfig(cfl=0.45, gamma=3.0, t_end=1.0, snapshot_dt=0.5)
    with np.errstate(all='ignore'):
        with pytest.raises(NumericalBlowupError) as info:
            step(Field(grid, np.full(10, 1e200), np.zeros(10)), cfg)
    assert 0 <= info.value.cell < 10


def test_negative_density_is_an_error():
    grid = Grid1D(0.0, 1.0, 10)
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=1.0, snapshot_dt=0.5)
    # a lone dense cell in vacuum loses twice its mass at cfl 2
    object.__setattr__(cfg, 'cfl', 2.0)
    rho = np.zeros(10)
    rho[5] = 1.0
    with pytest.raises(NumericalBlowupError, match='Negative density') as info:
        step(Field(grid, rho, np.zeros(10)), cfg)
    assert info.value.cell == 5


def test_trajectory_rejects_unordered(grid):
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=1.0, snapshot_dt=0.5)
    f = constant_field(grid, 1.0)
    with pytest.raises(ValueError):
        Trajectory([f, f], cfg)
    with pytest.raises(ValueError):
        Trajectory([], cfg)


def test_trajectory_file_round_trip(tmp_path, grid):
    cfg = SolverConfig(cfl=0.45, gamma=2.0, t_end=0.2, snapshot_dt=0.1)
    traj = simulate(bump_field(grid, (1.0, 0.2), 0.2, 1.0), cfg)
    path = str(tmp_path / 'trajectory.csv')
    write_trajectory(traj, path)

    with open(path, encoding='utf-8') as handle:
        lines = handle.read().splitlines()
    assert lines[0].startswith('# run')
    assert lines[1].startswith('# t=0.0 n=200')
    assert lines[2] == 'i,x_center,rho,mom'

    back = read_trajectory(path)
    assert back.grid == traj.grid
    assert back.config == traj.config
    np.testing.assert_array_equal(back.times, traj.times)
    for a, b in zip(back, traj):
        np.testing.assert_array_equal(a.rho, b.rho)
        np.testing.assert_array_equal(a.mom, b.mom)


def test_read_trajectory_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_trajectory(str(tmp_path / 'missing.csv'))
    bad = tmp_path / 'bad.csv'
    bad.write_text('i,x_center,rho,mom\n0,0,1,0\n', encoding='utf-8')
    with pytest.raises(ValueError):
        read_trajectory(str(bad))

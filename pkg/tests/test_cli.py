import json
import os

import numpy as np
import pytest

from rel_energy_lab import cli
from rel_energy_lab.data_plots import read_speed_csv
from rel_energy_lab.fv_solver import read_trajectory

SMALL_LEMMA = ['lemma.grid_n = 32', 'lemma.samples = 20000', 'lemma.direction_samples = 2000']


def _run(experiment, cfg_path, out_dir, *extra):
    return cli.main([experiment, '--config', cfg_path, '--out', str(out_dir), '--threads', '2', *extra])


def _shipped(name, *drop):
    ''' Lines of a shipped config without the given keys '''
    path = os.path.join(os.path.dirname(__file__), os.pardir, 'res', 'configs', name)
    with open(path, encoding='utf-8') as handle:
        lines = [line.rstrip('\n') for line in handle]
    return [line for line in lines if line.split('=')[0].strip() not in drop]


def _summary(out_dir):
    with open(os.path.join(out_dir, 'summary.json'), encoding='utf-8') as handle:
        return json.load(handle)


def test_constant(write_cfg, tmp_path, capsys):
    out = tmp_path / 'out'
    code = _run('constant', write_cfg(SMALL_LEMMA), out)
    assert code == 0
    printed = capsys.readouterr().out
    assert 'C_grid' in printed and 'C_analytic' in printed

    summary = _summary(out)
    assert summary['exit_code'] == 0
    assert summary['experiment'] == 'constant'
    assert summary['parameters']['gamma'] == 2.0
    assert 3.0 < summary['informational']['C_grid'] < 3.2
    assert summary['informational']['C_analytic'] == 4.0
    assert all(c['passed'] for c in summary['criteria'].values())
    assert os.path.isfile(out / 'constant.csv')


def test_constant_with_vacuum_box(write_cfg, tmp_path):
    out = tmp_path / 'out'
    code = _run('constant', write_cfg(SMALL_LEMMA + ['lemma.r_lo = 0.0']), out)
    summary = _summary(out)
    assert summary['informational']['C_analytic'] is None
    assert 'analytic_note' in summary['informational']
    assert code == summary['exit_code']


def test_invalid_gamma_exits_2(write_cfg, tmp_path, capsys):
    out = tmp_path / 'out'
    assert _run('constant', write_cfg(['gamma = 1.0']), out) == 2
    assert 'gamma must be > 1' in capsys.readouterr().err
    assert not os.path.exists(out / 'summary.json')


def test_missing_config_exits_2(tmp_path):
    assert _run('simulate', str(tmp_path / 'nope.cfg'), tmp_path / 'out') == 2


def test_unknown_experiment():
    with pytest.raises(SystemExit) as info:
        cli.main(['everything'])
    assert info.value.code == 2


def test_simulate_writes_trajectory(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(['grid.n_cells = 100', 'solver.t_end = 0.2', 'solver.snapshot_dt = 0.1'])
    assert _run('simulate', cfg, out, '--plot', '--seed', '5') == 0

    traj = read_trajectory(str(out / 'trajectory.csv'))
    assert traj.grid.n_cells == 100
    assert traj.times[-1] == 0.2
    assert os.path.isfile(out / 'simulate.csv')
    assert os.path.isfile(out / 'profiles.png')
    summary = _summary(out)
    assert summary['parameters']['seed'] == 5
    assert summary['criteria']['admissibility']['passed']


def test_simulate_blowup_exits_3(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(['gamma = 3.0', 'initial.rho_bar = 1e200', 'grid.n_cells = 50'])
    with np.errstate(all='ignore'):
        code = _run('simulate', cfg, out)
    assert code == 3
    assert _summary(out)['exit_code'] == 3
    assert 'Non-finite state' in _summary(out)['error']


def test_gronwall_constant_background(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(SMALL_LEMMA + ['gronwall.levels = 100, 200', 'gronwall.strong = constant', 'solver.t_end = 0.2'])
    assert _run('gronwall', cfg, out) == 0
    assert os.path.isfile(out / 'gronwall_constant_N200.csv')


def test_gronwall_shipped_regime_bounds_both_kinds(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(_shipped('gronwall.cfg', 'gronwall.levels', 'output.dir') + SMALL_LEMMA + ['gronwall.levels = 100, 200'])
    assert _run('gronwall', cfg, out) == 0
    criteria = _summary(out)['criteria']
    for kind in ('constant', 'reference'):
        assert criteria[f'{kind}_residual_N200']['passed']
        assert criteria[f'{kind}_residual_monotone']['passed']


def test_gronwall_without_growth_term_exits_1(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(SMALL_LEMMA + [
        'gronwall.levels = 100', 'gronwall.strong = reference', 'gronwall.factor = 0.0', 'solver.t_end = 0.2',
    ])
    assert _run('gronwall', cfg, out) == 1
    assert not _summary(out)['criteria']['reference_residual_N100']['passed']


def test_weak_strong_loses_smoothness_exits_1(write_cfg, tmp_path, capsys):
    out = tmp_path / 'out'
    cfg = write_cfg([
        'grid.x_min = -1.0', 'grid.x_max = 1.0', 'initial.amplitude = 1.0', 'initial.half_width = 0.5',
        'initial.extra_amplitude = 0.0', 'cutoff.eta = 0.5', 'solver.t_end = 1.0', 'solver.snapshot_dt = 0.1',
        'weak_strong.tau = 1.0', 'weak_strong.levels = 100', 'reference.refine = 32',
    ])
    assert _run('weak-strong', cfg, out) == 1
    assert 'lost smoothness' in capsys.readouterr().err
    assert _summary(out)['exit_code'] == 1


def test_finite_speed(write_cfg, tmp_path):
    out = tmp_path / 'out'
    assert _run('finite-speed', write_cfg(_shipped('finite_speed.cfg', 'output.dir')), out) == 0

    df, trailer = read_speed_csv(str(out / 'finite_speed_N800.csv'))
    assert list(df.columns) == ['t', 'radius']
    summary = _summary(out)
    criteria = summary['criteria']
    assert criteria['speed_excess_decreasing']['passed']
    assert criteria['extrapolated_speed']['value'] <= criteria['extrapolated_speed']['limit']
    ratios = summary['informational']['speed_over_sound']
    assert len(ratios) == 3 and ratios[0] > ratios[-1] > 0.9
    assert 0.9 < summary['informational']['extrapolated_over_sound'] < ratios[-1]
    assert trailer['speed'] == pytest.approx(ratios[1] * summary['informational']['sound_speed'])


def test_incompressible(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(['incompressible.quad_n = 64', 'incompressible.n_time = 26', 'incompressible.samples = 2000'])
    assert _run('incompressible', cfg, out) == 0
    criteria = _summary(out)['criteria']
    assert 'residual_translating_vortex' in criteria
    assert 'translating_vortex_drift_tau0.5' in criteria


def test_lemma_sweep(write_cfg, tmp_path):
    out = tmp_path / 'out'
    cfg = write_cfg(SMALL_LEMMA + ['lemma.gammas = 1.4, 2.0', 'lemma.boxes = 0.5, 2.0, 1.0,  0.0, 2.0, 1.0'])
    code = _run('lemma-sweep', cfg, out)
    summary = _summary(out)
    assert len(summary['informational']['skipped_boxes']) == 1
    assert summary['criteria']['g2_box0.5-2-1_gamma2_identity']['passed']
    assert summary['criteria']['g1.4_box0.5-2-1_flux_domination_violations']['passed']
    assert code == summary['exit_code']


def test_lemma_sweep_shipped_config(write_cfg, tmp_path):
    out = tmp_path / 'out'
    assert _run('lemma-sweep', write_cfg(_shipped('lemma_sweep.cfg', 'output.dir')), out) == 0
    summary = _summary(out)
    assert summary['wall_time_s'] < 60.0
    assert summary['criteria']['g3_box0-2-1_identification']['value'] == 0
    assert summary['criteria']['g2_box0-2-1_grid_refinement']['passed']

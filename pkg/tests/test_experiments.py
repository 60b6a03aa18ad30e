import os

import numpy as np
import pytest

from rel_energy_lab.core.errors import ConfigError
from rel_energy_lab.cutoff import cutoff_eval
from rel_energy_lab.experiments import (
    ExperimentResult, _snapshot_index, cutoff_speed, make_cutoff, make_grid, offset_initial, run_weak_strong,
    solver_config, strong_initial, union_box, weak_initial,
)
from rel_energy_lab.fv_solver import simulate
from rel_energy_lab.gas_core import StateBox, lemma_constant_analytic


def test_weak_and_strong_data_agree_on_cutoff(quick_config):
    config = quick_config()
    grid = make_grid(config, 200)
    c = make_cutoff(config, 1.5)
    inside = cutoff_eval(c, grid.centers, 0.0) > 0
    strong = strong_initial(config, grid)
    weak = weak_initial(config, grid)
    np.testing.assert_array_equal(weak.rho[inside], strong.rho[inside])
    assert np.max(weak.rho - strong.rho) > 0.1
    np.testing.assert_array_equal(offset_initial(config, grid).rho[inside], 1.0)


def test_cutoff_speed_modes(quick_config):
    box = StateBox(0.5, 2.0, 1.0, 2.0)
    assert cutoff_speed(quick_config(cutoff__speed_mode='explicit', cutoff__speed=2.5), box) == 2.5
    assert cutoff_speed(quick_config(cutoff__speed_mode='analytic'), box) == lemma_constant_analytic(box)
    assert 3.0 < cutoff_speed(quick_config(), box) < 3.2


def test_union_box():
    box = union_box([StateBox(0.9, 1.1, 0.1, 2.0), StateBox(0.8, 1.0, 0.3, 2.0)])
    assert (box.r_lo, box.r_hi, box.v_max) == (0.8, 1.1, 0.3)


def test_snapshot_index(quick_config):
    config = quick_config(solver__t_end=0.2, solver__snapshot_dt=0.05)
    traj = simulate(strong_initial(config, make_grid(config, 50)), solver_config(config))
    assert _snapshot_index(traj, 0.1) == 2
    with pytest.raises(ConfigError):
        _snapshot_index(traj, 0.12)


def test_result_passed():
    result = ExperimentResult()
    assert result.passed
    result.check('a', 1.0, 2.0, True)
    assert result.passed
    result.check('b', 3.0, 2.0, False)
    assert not result.passed
    assert result.criteria['b'].limit == 2.0


def test_weak_strong_small(quick_config, tmp_path):
    config = quick_config(weak_strong__levels=(100, 200), solver__t_end=0.2, weak_strong__tau=0.2)
    result = run_weak_strong(config, str(tmp_path))
    assert result.criteria['matched_initial_energy'].passed
    assert result.criteria['sign_condition_violations'].value == 0
    assert len(result.informational['E_tau']) == 2
    assert all(e >= 0 for e in result.informational['E_tau'])
    assert [type(d) for d in result.informational['matched_decay']] == [bool, bool]
    assert os.path.isfile(tmp_path / 'weak_strong.csv')
    assert os.path.isfile(tmp_path / 'weak_strong_gronwall_N200.csv')

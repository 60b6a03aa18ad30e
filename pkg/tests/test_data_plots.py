import json

import numpy as np
import pandas as pd

from rel_energy_lab.data_plots import (
    GRONWALL_COLUMNS, plot_gronwall, plot_profiles, plot_series, plot_support, read_speed_csv, write_gronwall_csv,
    write_speed_csv, write_summary, write_table,
)
from rel_energy_lab.diagnostics import GronwallReport
from rel_energy_lab.fv_solver import bump_field, simulate


def _report():
    times = np.linspace(0.0, 0.2, 5)
    lhs = np.array([0.0, 1e-4, 2e-4, 3e-4, 3.5e-4])
    return GronwallReport(times, lhs, lhs + 1e-5, np.ones(5), np.zeros(5), np.zeros(5), 2.0)


def test_gronwall_csv(tmp_path):
    path = write_gronwall_csv(_report(), str(tmp_path / 'g.csv'))
    df = pd.read_csv(path, float_precision='round_trip')
    assert list(df.columns) == GRONWALL_COLUMNS
    np.testing.assert_array_equal(df.lhs.to_numpy(), _report().lhs)
    np.testing.assert_allclose(df.residual.to_numpy(), 1e-5)


def test_speed_csv_trailer(tmp_path):
    times = np.linspace(0.0, 2.0, 9)
    radii = 4.0 + 1.45 * times
    path = write_speed_csv(times, radii, 1.45, 4.0, 1.4997, str(tmp_path / 's.csv'))
    with open(path, encoding='utf-8') as handle:
        assert handle.read().splitlines()[-1] == 'speed=1.45 intercept=4.0 c_bound=1.4997'
    df, trailer = read_speed_csv(path)
    assert trailer == {'speed': 1.45, 'intercept': 4.0, 'c_bound': 1.4997}
    np.testing.assert_array_equal(df.radius.to_numpy(), radii)


def test_summary_handles_numpy_and_inf(tmp_path):
    path = write_summary({
        'value': np.float64(1.5),
        'count': np.int64(3),
        'flag': np.bool_(True),
        'factor': np.inf,
        'series': np.array([1.0, 2.0]),
        'nested': {'missing': None, 'items': (1, 2)},
    }, str(tmp_path / 'summary.json'))
    with open(path, encoding='utf-8') as handle:
        data = json.load(handle)
    assert data == {
        'value': 1.5, 'count': 3, 'flag': True, 'factor': 'inf', 'series': [1.0, 2.0],
        'nested': {'missing': None, 'items': [1, 2]},
    }


def test_table(tmp_path):
    path = write_table([{'n': 100, 'e': 0.5}, {'n': 200, 'e': 0.25}], str(tmp_path / 't.csv'))
    df = pd.read_csv(path)
    assert list(df.columns) == ['n', 'e']
    assert df.n.tolist() == [100, 200]


def test_plots_write_png(tmp_path, grid, solver):
    traj = simulate(bump_field(grid, (1.0, 0.0), 0.2, 1.0), solver)
    times = np.linspace(0.0, 1.0, 5)
    files = [
        plot_gronwall(_report(), str(tmp_path / 'g.png'), 'test'),
        plot_support(times, 1.0 + times, 1.0, 1.0, 1.5, str(tmp_path / 's.png')),
        plot_profiles(traj, str(tmp_path / 'p.png')),
        plot_series(np.array([100, 200]), {'E': np.array([1e-3, 2.5e-4])}, str(tmp_path / 'e.png'), 'N', 'E', log=True),
    ]
    for path in files:
        with open(path, 'rb') as handle:
            assert handle.read(8) == b'\x89PNG\r\n\x1a\n'

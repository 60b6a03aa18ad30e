import matplotlib
import numpy as np
import pytest

from rel_energy_lab.core.utils import load_config
from rel_energy_lab.fv_solver import Grid1D, SolverConfig
from rel_energy_lab.gas_core import GasParams

matplotlib.use('Agg')


@pytest.fixture
def gas():
    return GasParams(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def grid():
    return Grid1D(-4.0, 4.0, 200, 'periodic')


@pytest.fixture
def solver():
    return SolverConfig(cfl=0.45, gamma=2.0, t_end=0.2, snapshot_dt=0.05)


@pytest.fixture
def write_cfg(tmp_path):
    ''' Write 'key = value' lines to a config file and return its path '''

    def _write(lines, name='run.cfg'):
        path = tmp_path / name
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return str(path)

    return _write


@pytest.fixture
def quick_config():
    ''' Defaults shrunk so experiments finish in a few seconds '''

    def _config(**overrides):
        values = {
            'lemma.samples': 20_000,
            'lemma.direction_samples': 2_000,
            'lemma.grid_n': 32,
        }
        values.update({key.replace('__', '.'): value for key, value in overrides.items()})
        return load_config(None, values)

    return _config

import glob
import logging
import os

import pytest

from rel_energy_lab.core.errors import ConfigError
from rel_energy_lab.core.utils import DEFAULTS, load_config, setup_logging

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, 'res', 'configs')


def test_defaults_without_file():
    config = load_config()
    assert config == DEFAULTS


def test_file_values_are_typed(write_cfg):
    path = write_cfg([
        '# comment line',
        'gamma = 1.4   # trailing comment',
        'grid.n_cells = 64',
        'grid.bc = copy-out',
        'gronwall.levels = 100, 200',
        'incompressible.taus = 0.25',
        'output.plot = yes',
    ])
    config = load_config(path)
    assert config['gamma'] == 1.4
    assert config['grid.n_cells'] == 64 and isinstance(config['grid.n_cells'], int)
    assert config['grid.bc'] == 'copy-out'
    assert config['gronwall.levels'] == (100, 200)
    assert config['incompressible.taus'] == (0.25,)
    assert config['output.plot'] is True


def test_overrides_win(write_cfg):
    path = write_cfg(['seed = 3'])
    assert load_config(path, {'seed': 7})['seed'] == 7


@pytest.mark.parametrize('lines, message', [
    (['gamma = 1'], 'gamma must be > 1'),
    (['colour = red'], "unknown key 'colour'"),
    (['seed = 1', 'seed = 2'], "duplicate key 'seed'"),
    (['gamma 2.0'], "expected 'key = value'"),
    (['grid.n_cells = many'], "cannot read 'grid.n_cells'"),
    (['output.plot = maybe'], "cannot read 'output.plot'"),
    (['grid.n_cells = 2'], 'n_cells >= 4'),
    (['solver.cfl = 0.9'], 'cfl must lie'),
    (['cutoff.speed_mode = fastest'], 'speed_mode'),
    (['reference.refine = 4'], 'refine must be >= 8'),
    (['lemma.boxes = 0.5, 2.0'], 'triples'),
    (['finite_speed.threshold = 0'], 'threshold must be > 0'),
    (['finite_speed.order = 0'], 'order must be > 0'),
])
def test_invalid_files(write_cfg, lines, message):
    with pytest.raises(ConfigError, match=message):
        load_config(write_cfg(lines))


def test_error_names_the_line(write_cfg):
    with pytest.raises(ConfigError, match='Line 2'):
        load_config(write_cfg(['gamma = 2.0', 'nonsense = 1']))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(str(tmp_path / 'missing.cfg'))


def test_unknown_override():
    with pytest.raises(ConfigError):
        load_config(None, {'solver.speed': 1.0})


@pytest.mark.parametrize('path', sorted(glob.glob(os.path.join(CONFIG_DIR, '*.cfg'))))
def test_shipped_configs_load(path):
    config = load_config(path)
    assert config['output.dir'].startswith('results')


def test_setup_logging_replaces_handler():
    setup_logging(1)
    setup_logging(2)
    root = logging.getLogger()
    ours = [h for h in root.handlers if getattr(h, '_rel_energy_lab', False)]
    assert len(ours) == 1
    assert root.level == logging.DEBUG
    setup_logging(0)
    assert root.level == logging.WARNING

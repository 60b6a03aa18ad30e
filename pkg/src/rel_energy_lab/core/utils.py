#%% Relevant packages

import logging
import os
import sys
from typing import Any, Dict, Mapping, Optional

#%% Custom packages

from .errors import ConfigError

logger = logging.getLogger(__name__)

#%% Constants

EXPERIMENTS = ('constant', 'simulate', 'weak-strong', 'finite-speed', 'gronwall', 'incompressible', 'lemma-sweep')
SPEED_MODES = ('grid', 'analytic', 'explicit')
LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

# Every accepted key with its default; the default's type drives coercion
DEFAULTS: Dict[str, Any] = {
    'experiment': 'constant',
    'gamma': 2.0,
    'seed': 0,

    'grid.x_min': -4.0,
    'grid.x_max': 4.0,
    'grid.n_cells': 400,
    'grid.bc': 'periodic',

    'initial.rho_bar': 1.0,
    'initial.vel_bar': 0.0,
    'initial.amplitude': 0.2,
    'initial.half_width': 1.0,
    'initial.center': 0.0,
    'initial.extra_amplitude': 0.2, # second bump of the weak data, outside the cutoff
    'initial.extra_half_width': 0.5,
    'initial.extra_center': 2.5,

    'cutoff.eta': 1.0,
    'cutoff.center': 0.0,
    'cutoff.speed_mode': 'grid',
    'cutoff.speed': 1.0, # used when speed_mode = explicit

    'solver.cfl': 0.45,
    'solver.t_end': 0.4,
    'solver.snapshot_dt': 0.05,
    'solver.vacuum_eps': 1e-12,

    'reference.refine': 9,
    'reference.monitor_limit': 5.0,

    'lemma.r_lo': 0.5,
    'lemma.r_hi': 2.0,
    'lemma.v_max': 1.0,
    'lemma.grid_n': 64,
    'lemma.dim': 1,
    'lemma.samples': 1_000_000,
    'lemma.direction_samples': 10_000,
    'lemma.gammas': (1.4, 2.0, 3.0),
    'lemma.boxes': (0.5, 2.0, 1.0, 0.0, 2.0, 1.0, 0.9, 1.1, 0.2), # (r_lo, r_hi, v_max) triples

    'gronwall.factor': 2.0,
    'gronwall.levels': (200, 400, 800),
    'gronwall.strong': 'both',

    'weak_strong.levels': (200, 400, 800),
    'weak_strong.tau': 0.2,
    'weak_strong.min_order': 0.8,

    'finite_speed.levels': (400, 800, 1600),
    'finite_speed.threshold': 1e-7,
    'finite_speed.order': 0.5, # exponent of dx in the speed excess

    'incompressible.taus': (0.1, 0.5),
    'incompressible.quad_n': 256,
    'incompressible.n_time': 101,
    'incompressible.samples': 10_000,
    'incompressible.fd_step': 1e-4,
    'incompressible.circulation': 1.0,
    'incompressible.translation': (2.0, 0.0),
    'incompressible.vortex_center': (-2.6, 0.0),
    'incompressible.cutoff_center': (0.0, 0.0),
    'incompressible.cutoff_eta': 1.5,
    'incompressible.cutoff_speed': 0.5,

    'tolerances.admissibility': 1e-10,
    'tolerances.mass': 1e-12,
    'tolerances.energy': 1e-12,
    'tolerances.nonneg': 1e-12,
    'tolerances.identity': 1e-12,
    'tolerances.refinement': 0.02,
    'tolerances.match': 1e-10,
    'tolerances.sign': 1e-12,
    'tolerances.gronwall_rel': 0.01,
    'tolerances.gronwall_abs': 1e-10,
    'tolerances.residual': 1e-6,
    'tolerances.incompressible': 1e-8,

    'output.dir': 'results',
    'output.plot': False,
}

#%% Coercion

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')


def _coerce(key: str, raw: str, default: Any, line_no: int) -> Any:
    try:
        if isinstance(default, bool):
            if raw.lower() in _TRUE:
                return True
            if raw.lower() in _FALSE:
                return False
            raise ValueError(f"'{raw}' is not a boolean")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [item.strip() for item in raw.split(',') if item.strip()]
            if not items:
                raise ValueError("empty list")
            as_int = all(isinstance(d, int) for d in default)
            return tuple(int(item) if as_int else float(item) for item in items)
        return raw
    except ValueError as err:
        raise ConfigError(f"Line {line_no}: cannot read '{key}' from '{raw}' ({err}).") from err

#%% Validation

def _validate(config: Mapping[str, Any]) -> None:
    ''' Re-run the invariants of every object a config describes '''
    # imported here, the domain modules import this package
    from ..cutoff import RadialBump, TransportedCutoff
    from ..fv_solver import Grid1D, SolverConfig
    from ..gas_core import GasParams, StateBox

    if config['experiment'] not in EXPERIMENTS:
        raise ConfigError(f"Unknown experiment '{config['experiment']}', expected one of {EXPERIMENTS}.")
    if config['cutoff.speed_mode'] not in SPEED_MODES:
        raise ConfigError(f"Unknown cutoff.speed_mode '{config['cutoff.speed_mode']}', expected one of {SPEED_MODES}.")
    if config['gronwall.strong'] not in ('constant', 'reference', 'both'):
        raise ConfigError(f"gronwall.strong must be constant, reference or both, got '{config['gronwall.strong']}'.")
    if len(config['lemma.boxes']) % 3:
        raise ConfigError("lemma.boxes must hold (r_lo, r_hi, v_max) triples.")

    try:
        GasParams(config['gamma'])
        Grid1D(config['grid.x_min'], config['grid.x_max'], config['grid.n_cells'], config['grid.bc'])
        SolverConfig(
            cfl=config['solver.cfl'],
            gamma=config['gamma'],
            t_end=config['solver.t_end'],
            snapshot_dt=config['solver.snapshot_dt'],
            vacuum_eps=config['solver.vacuum_eps'],
        )
        RadialBump(config['cutoff.center'], config['cutoff.eta'])
        if config['experiment'] == 'constant':
            StateBox(config['lemma.r_lo'], config['lemma.r_hi'], config['lemma.v_max'], config['gamma'])
        if config['experiment'] == 'incompressible':
            TransportedCutoff(
                RadialBump(config['incompressible.cutoff_center'], config['incompressible.cutoff_eta']),
                config['incompressible.cutoff_speed'],
            )
        for gamma in config['lemma.gammas']:
            GasParams(gamma)
        for key in ('gronwall.levels', 'weak_strong.levels', 'finite_speed.levels'):
            if any(n < 4 for n in config[key]):
                raise ValueError(f"{key} entries must be >= 4, got {config[key]}.")
        if config['reference.refine'] < 8:
            raise ValueError(f"reference.refine must be >= 8, got {config['reference.refine']}.")
        if config['cutoff.speed_mode'] == 'explicit' and not config['cutoff.speed'] > 0:
            raise ValueError(f"cutoff.speed must be > 0, got {config['cutoff.speed']}.")
        if not config['finite_speed.threshold'] > 0:
            raise ValueError(f"finite_speed.threshold must be > 0, got {config['finite_speed.threshold']}.")
        if not config['finite_speed.order'] > 0:
            raise ValueError(f"finite_speed.order must be > 0, got {config['finite_speed.order']}.")
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"Invalid configuration: {err}") from err

#%% Load configuration file

def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
    '''
    Read a flat 'key = value' configuration on top of DEFAULTS.

    Parameters
    ----------
    path : str, optional
        Configuration file; '#' starts a comment. Without a path the
        defaults are returned.
    overrides : mapping, optional
        Values applied after the file (already typed).

    Raises
    ------
    FileNotFoundError
        Missing file.
    ConfigError
        Unknown or duplicate key, malformed line, uncoercible value or a
        violated invariant.

    Returns
    -------
    dict
        Dotted key to typed value, every key of DEFAULTS present.

    '''
    config = dict(DEFAULTS)
    if path is not None:
        if not os.path.isfile(path):
            raise FileNotFoundError(f"Configuration file not found: {path}")
        seen = set()
        with open(path, 'r', encoding='utf-8') as file:
            for line_no, line in enumerate(file, start=1):
                content = line.split('#', 1)[0].strip()
                if not content:
                    continue
                if '=' not in content:
                    raise ConfigError(f"Line {line_no}: expected 'key = value', got '{content}'.")
                key, raw = (part.strip() for part in content.split('=', 1))
                if key not in DEFAULTS:
                    raise ConfigError(f"Line {line_no}: unknown key '{key}'.")
                if key in seen:
                    raise ConfigError(f"Line {line_no}: duplicate key '{key}'.")
                seen.add(key)
                config[key] = _coerce(key, raw, DEFAULTS[key], line_no)
        logger.debug(f"Read {len(seen)} keys from {path}.")

    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"Unknown override '{key}'.")
        config[key] = value

    _validate(config)
    return config

#%% Logging

def setup_logging(verbosity: int = 0) -> None:
    ''' WARNING by default, INFO with -v, DEBUG with -vv; records go to stderr '''
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_rel_energy_lab', False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._rel_energy_lab = True
    root.addHandler(handler)
    root.setLevel(level)

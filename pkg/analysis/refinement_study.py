#%% Relevant packages

import os

import numpy as np
import pandas as pd

#%% Custom packages

from rel_energy_lab.core.utils import load_config, setup_logging
from rel_energy_lab.data_plots import plot_series, write_table
from rel_energy_lab.diagnostics import localized_relative_energy, observed_order, realized_box
from rel_energy_lab.exact_solutions import reference_strong
from rel_energy_lab.experiments import (
    cutoff_speed, gas_params, make_cutoff, make_grid, solver_config, strong_initial, union_box, weak_initial,
)
from rel_energy_lab.fv_solver import simulate

# Weak-strong setup, extended to finer grids than the shipped experiment
setup_logging(1)
config = load_config(os.path.join(os.path.dirname(__file__), os.pardir, 'res', 'configs', 'weak_strong.cfg'))
LEVELS = [100, 200, 400, 800, 1600]
OUT_DIR = os.path.join('results', 'refinement_study')
os.makedirs(OUT_DIR, exist_ok=True)

g = gas_params(config)
cfg = solver_config(config)

#%% Runs

runs = []
for n in LEVELS:
    grid = make_grid(config, n)
    strong = reference_strong(
        strong_initial(config, grid),
        config['reference.refine'],
        cfg,
        config['reference.monitor_limit'],
        fine_init=lambda fine: strong_initial(config, fine),
    )
    runs.append((n, simulate(weak_initial(config, grid), cfg), strong))

# One cutoff for every level
box = union_box([realized_box(weak, strong, g.gamma) for _, weak, strong in runs])
c = make_cutoff(config, cutoff_speed(config, box, os.cpu_count() or 1))

#%% Localized relative energy at the final time

energies = np.array([localized_relative_energy(weak[-1], strong, c, g) for _, weak, strong in runs])
orders = np.concatenate(([np.nan], observed_order(energies, LEVELS)))

df = pd.DataFrame({'n_cells': LEVELS, 'E_final': energies, 'order': orders})
print(df.to_string(index=False))

write_table(df.to_dict('records'), os.path.join(OUT_DIR, 'refinement_study.csv'))
plot_series(
    np.array(LEVELS),
    {'E(t_end)': energies, 'first order': energies[0] * LEVELS[0] / np.array(LEVELS)},
    os.path.join(OUT_DIR, 'refinement_study.png'),
    'cells',
    'localized relative energy',
    log=True,
)

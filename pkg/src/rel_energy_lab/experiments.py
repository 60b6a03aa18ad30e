#%% Relevant packages

import logging
from dataclasses import dataclass, field
from os.path import join
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

#%% Custom packages

from .core.errors import ConfigError, HypothesisError, NotSmoothError, UnsupportedRegimeError
from .cutoff import RadialBump, TransportedCutoff, hermite_profile, transport_residual_max
from .data_plots import (
    plot_gronwall, plot_profiles, plot_series, plot_support, write_gronwall_csv, write_speed_csv, write_table,
)
from .diagnostics import (
    admissibility_report, extrapolated_speed, gronwall_evaluate, incompressible_gronwall, matched_data_decay,
    observed_order, propagation_speed, realized_box, relative_energy_series, sign_condition_sweep, support_radii,
)
from .exact_solutions import (
    StrongSolution1D, constant_strong, reference_strong, residual_check, rest, shear, translating_vortex, vortex,
)
from .fv_solver import Field, Grid1D, SolverConfig, Trajectory, bump_field, simulate, write_trajectory
from .gas_core import (
    SAFETY_FACTOR, GasParams, StateBox, direction_check, flux_domination_violations, identification_violations,
    lemma_constant_analytic, lemma_constant_grid, quadratic_bound_constant, rel_energy_density_A, relative_potential,
    sample_states, sound_speed,
)

logger = logging.getLogger(__name__)

#%% Constants

TRANSPORT_SAMPLES = 10_000 # random points of the cutoff transport check
TRANSPORT_MIN_ORDER = 1.9

#%% Result types

class Criterion(NamedTuple):
    passed: bool
    value: Any
    limit: Any


@dataclass
class ExperimentResult:
    ''' Pass/fail criteria, informational values and written files of one experiment '''

    criteria: Dict[str, Criterion] = field(default_factory=dict)
    informational: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria.values())

    def check(self, name: str, value: Any, limit: Any, passed: bool) -> None:
        self.criteria[name] = Criterion(bool(passed), value, limit)
        if not passed:
            logger.warning(f"Criterion '{name}' failed: value {value!r}, limit {limit!r}.")

#%% Building blocks from a configuration

def gas_params(config: Mapping[str, Any]) -> GasParams:
    return GasParams(config['gamma'])


def make_grid(config: Mapping[str, Any], n_cells: Optional[int] = None) -> Grid1D:
    return Grid1D(
        config['grid.x_min'],
        config['grid.x_max'],
        config['grid.n_cells'] if n_cells is None else n_cells,
        config['grid.bc'],
    )


def solver_config(config: Mapping[str, Any]) -> SolverConfig:
    return SolverConfig(
        cfl=config['solver.cfl'],
        gamma=config['gamma'],
        t_end=config['solver.t_end'],
        snapshot_dt=config['solver.snapshot_dt'],
        vacuum_eps=config['solver.vacuum_eps'],
    )


def background(config: Mapping[str, Any]) -> Tuple[float, float]:
    return config['initial.rho_bar'], config['initial.vel_bar']


def strong_initial(config: Mapping[str, Any], grid: Grid1D) -> Field:
    ''' Background plus the central bump '''
    return bump_field(
        grid,
        background(config),
        config['initial.amplitude'],
        config['initial.half_width'],
        config['initial.center'],
    )


def _extra_bump(config: Mapping[str, Any], grid: Grid1D) -> np.ndarray:
    return config['initial.extra_amplitude'] * hermite_profile(
        np.abs(grid.centers - config['initial.extra_center']), config['initial.extra_half_width']
    )


def weak_initial(config: Mapping[str, Any], grid: Grid1D) -> Field:
    ''' Central bump plus the extra bump placed outside the cutoff '''
    base = strong_initial(config, grid)
    rho = base.rho + _extra_bump(config, grid)
    return Field(grid, rho, rho * config['initial.vel_bar'])


def offset_initial(config: Mapping[str, Any], grid: Grid1D) -> Field:
    ''' Background with only the extra bump, for comparisons against the constant state '''
    rho_bar, vel_bar = background(config)
    rho = rho_bar + _extra_bump(config, grid)
    return Field(grid, rho, rho * vel_bar)


def cutoff_speed(config: Mapping[str, Any], box: StateBox, workers: int = 1) -> float:
    mode = config['cutoff.speed_mode']
    if mode == 'explicit':
        return config['cutoff.speed']
    if mode == 'analytic':
        return lemma_constant_analytic(box)
    return lemma_constant_grid(box, 1, config['lemma.grid_n'], workers)


def make_cutoff(config: Mapping[str, Any], speed: float) -> TransportedCutoff:
    return TransportedCutoff(RadialBump(config['cutoff.center'], config['cutoff.eta']), speed)


def union_box(boxes: Sequence[StateBox]) -> StateBox:
    return StateBox(
        min(b.r_lo for b in boxes),
        max(b.r_hi for b in boxes),
        max(b.v_max for b in boxes),
        boxes[0].gamma,
    )


def _reference(config: Mapping[str, Any], init: Field, cfg: SolverConfig) -> StrongSolution1D:
    strong = reference_strong(
        init,
        config['reference.refine'],
        cfg,
        config['reference.monitor_limit'],
        fine_init=lambda fine: strong_initial(config, fine),
    )
    if not strong.smooth:
        raise NotSmoothError(
            f"Reference run on {init.grid.n_cells * config['reference.refine']} cells lost smoothness "
            f"(monitor ratio {strong.monitor_ratio:.3g} > {config['reference.monitor_limit']:g}); shorten solver.t_end."
        )
    return strong


def _snapshot_index(traj: Trajectory, tau: float) -> int:
    k = int(np.argmin(np.abs(traj.times - tau)))
    if abs(traj.times[k] - tau) > 1e-9 * max(1.0, abs(tau)):
        raise ConfigError(f"tau={tau:g} is not a snapshot time; align solver.snapshot_dt with it.")
    return k


def _levels(config: Mapping[str, Any], key: str) -> List[int]:
    return sorted(set(config[key]))


def _transport_order(c: TransportedCutoff, rng: np.random.Generator) -> Tuple[float, float]:
    ''' Largest transport residual at the finer step and its observed order under halving '''
    h = c.bump.eta / (16.0 * (1.0 + c.speed))
    coarse = transport_residual_max(c, TRANSPORT_SAMPLES, h, rng)
    fine = transport_residual_max(c, TRANSPORT_SAMPLES, 0.5 * h, rng)
    if fine <= 1e-12 * max(1.0, coarse):
        # speed 1 transports the profile exactly on the stencil
        return fine, np.inf
    return fine, float(np.log2(coarse / fine))

#%% constant

def run_constant(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    ''' Grid and analytic flux-domination constants of the configured box '''
    result = ExperimentResult()
    box = StateBox(config['lemma.r_lo'], config['lemma.r_hi'], config['lemma.v_max'], config['gamma'])
    dim = config['lemma.dim']
    grid_n = config['lemma.grid_n']
    rng = np.random.default_rng(config['seed'])

    c_grid = lemma_constant_grid(box, dim, grid_n, workers)
    c_fine = lemma_constant_grid(box, dim, 2 * grid_n, workers)
    change = abs(c_fine - c_grid) / c_grid
    result.check('grid_refinement', change, config['tolerances.refinement'], change < config['tolerances.refinement'])

    try:
        c_analytic = lemma_constant_analytic(box)
        floor = c_grid / SAFETY_FACTOR
        result.check('analytic_ordering', c_analytic, floor, c_analytic >= floor)
    except UnsupportedRegimeError as err:
        c_analytic = None
        result.informational['analytic_note'] = str(err)

    violations = flux_domination_violations(box, c_grid, config['lemma.samples'], rng, dim)
    result.check('flux_domination_violations', violations, 0, violations == 0)

    result.informational.update({'C_grid': c_grid, 'C_grid_refined': c_fine, 'C_analytic': c_analytic})
    logger.info(f"C_grid={c_grid:.6g}, C_analytic={c_analytic}, refined change {change:.3g}.")

    rows = [
        {'quantity': 'C_grid', 'value': c_grid},
        {'quantity': 'C_grid_refined', 'value': c_fine},
        {'quantity': 'C_analytic', 'value': np.nan if c_analytic is None else c_analytic},
    ]
    result.files.append(write_table(rows, join(out_dir, 'constant.csv')))
    return result

#%% simulate

def run_simulate(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    ''' One solver run with admissibility, mass and energy audits '''
    result = ExperimentResult()
    g = gas_params(config)
    cfg = solver_config(config)
    traj = simulate(strong_initial(config, make_grid(config)), cfg)
    result.files.append(join(out_dir, 'trajectory.csv'))
    write_trajectory(traj, result.files[-1])

    production = admissibility_report(traj)
    result.check('admissibility', production, config['tolerances.admissibility'],
                 production <= config['tolerances.admissibility'])

    mass = np.array([f.total_mass() for f in traj])
    energy = np.array([f.total_energy(g, cfg.vacuum_eps) for f in traj])
    mass_drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0]))
    energy_rise = float(max(0.0, np.max(np.diff(energy), initial=0.0)) / energy[0])
    result.check('mass_conservation', mass_drift, config['tolerances.mass'], mass_drift <= config['tolerances.mass'])
    result.check('energy_non_increasing', energy_rise, config['tolerances.energy'],
                 energy_rise <= config['tolerances.energy'])

    result.informational.update({
        'steps': int(traj.step_times.size),
        'energy_loss': float((energy[0] - energy[-1]) / energy[0]),
        'min_density': float(min(np.min(f.rho) for f in traj)),
        'clipped_cells': traj.clipped_cells,
        'clipped_mass': traj.clipped_mass,
    })
    rows = [
        {'t': f.time, 'mass': m, 'momentum': f.total_momentum(), 'energy': e}
        for f, m, e in zip(traj, mass, energy)
    ]
    result.files.append(write_table(rows, join(out_dir, 'simulate.csv')))
    if config['output.plot']:
        result.files.append(plot_profiles(traj, join(out_dir, 'profiles.png')))
    return result

#%% gronwall

def run_gronwall(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    '''
    Discrete Gronwall inequality against the constant background (the weak
    data carry a bump outside the cutoff) and against a reference run of the
    central bump, over the configured refinement levels.
    '''
    result = ExperimentResult()
    g = gas_params(config)
    cfg = solver_config(config)
    levels = _levels(config, 'gronwall.levels')
    kinds = ('constant', 'reference') if config['gronwall.strong'] == 'both' else (config['gronwall.strong'],)
    rel_tol = config['tolerances.gronwall_rel']
    abs_tol = config['tolerances.gronwall_abs']

    for kind in kinds:
        runs = []
        for n in levels:
            grid = make_grid(config, n)
            if kind == 'constant':
                strong = constant_strong(*background(config))
                init = offset_initial(config, grid)
            else:
                init = strong_initial(config, grid)
                strong = _reference(config, init, cfg)
            runs.append((n, simulate(init, cfg), strong))

        box = union_box([realized_box(weak, strong, g.gamma) for _, weak, strong in runs])
        c = make_cutoff(config, cutoff_speed(config, box, workers))
        result.informational[f'{kind}_cutoff_speed'] = c.speed
        residual, order = _transport_order(c, np.random.default_rng(config['seed']))
        result.check(f'{kind}_cutoff_transport_order', order, TRANSPORT_MIN_ORDER, order >= TRANSPORT_MIN_ORDER)
        result.informational[f'{kind}_cutoff_transport_residual'] = residual

        worst, factors = [], []
        for n, weak, strong in runs:
            report = gronwall_evaluate(weak, strong, c, g, config['gronwall.factor'], config['tolerances.match'])
            worst.append(report.worst_residual)
            factors.append(report.sufficient_factor)
            result.files.append(write_gronwall_csv(report, join(out_dir, f'gronwall_{kind}_N{n}.csv')))
            if config['output.plot']:
                result.files.append(plot_gronwall(report, join(out_dir, f'gronwall_{kind}_N{n}.png'), f'{kind}, N={n}'))
            logger.info(f"{kind} N={n}: worst residual {report.worst_residual:.3g}, max lhs {np.max(report.lhs):.3g}.")

        limit = -(rel_tol * float(np.max(np.abs(report.lhs))) + abs_tol)
        monotone = bool(np.all(np.diff(worst) >= -abs_tol))
        result.check(f'{kind}_residual_monotone', worst, 'non-decreasing', monotone)
        result.check(f'{kind}_residual_N{levels[-1]}', worst[-1], limit, report.passed(rel_tol, abs_tol))
        result.informational[f'{kind}_worst_residuals'] = worst
        result.informational[f'{kind}_sufficient_factor'] = factors
    return result

#%% weak-strong

def run_weak_strong(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    '''
    Local weak-strong uniqueness: data agreeing on the cutoff ball, relative
    energy at tau under refinement, and the sign condition along the runs.
    '''
    result = ExperimentResult()
    g = gas_params(config)
    cfg = solver_config(config)
    levels = _levels(config, 'weak_strong.levels')
    tau = config['weak_strong.tau']

    runs = []
    for n in levels:
        grid = make_grid(config, n)
        strong = _reference(config, strong_initial(config, grid), cfg)
        runs.append((n, simulate(weak_initial(config, grid), cfg), strong))

    box = union_box([realized_box(weak, strong, g.gamma) for _, weak, strong in runs])
    c = make_cutoff(config, cutoff_speed(config, box, workers))
    result.informational.update({'cutoff_speed': c.speed, 'realized_box': [box.r_lo, box.r_hi, box.v_max]})

    rows = []
    energies, initial, worst, violations, decays = [], [], [], 0, []
    for n, weak, strong in runs:
        series = relative_energy_series(weak, strong, c, g)
        k = _snapshot_index(weak, tau)
        sweep = sign_condition_sweep(weak, strong, c, g, config['tolerances.sign'])
        report = gronwall_evaluate(weak, strong, c, g, config['gronwall.factor'], config['tolerances.match'])

        energies.append(float(series.values[k]))
        initial.append(float(series.values[0]))
        worst.append(report.worst_residual)
        violations += sweep.violations
        decays.append(matched_data_decay(series, config['tolerances.match']))
        rows.append({
            'n_cells': n, 'E_tau': energies[-1], 'E_0': initial[-1], 'sign_max': sweep.max_value,
            'sign_violations': sweep.violations, 'sign_inapplicable': sweep.inapplicable,
            'sign_matched': sweep.matched,
            'worst_residual': report.worst_residual,
        })
        result.files.append(write_table(
            [{'t': t, 'E': e} for t, e in zip(series.times, series.values)],
            join(out_dir, f'weak_strong_N{n}.csv'),
        ))
        result.files.append(write_gronwall_csv(report, join(out_dir, f'weak_strong_gronwall_N{n}.csv')))
        logger.info(f"N={n}: E(tau={tau:g}) = {energies[-1]:.4g}, sign max {sweep.max_value:.3g}.")

    orders = observed_order(energies, levels)
    for row, order in zip(rows[1:], orders):
        row['order'] = float(order)
    rows[0]['order'] = np.nan
    result.files.append(write_table(rows, join(out_dir, 'weak_strong.csv')))

    min_order = float(np.min(orders))
    result.check('observed_order', min_order, config['weak_strong.min_order'],
                 min_order >= config['weak_strong.min_order'])
    result.check('sign_condition_violations', violations, 0, violations == 0)
    result.check('matched_initial_energy', max(initial), config['tolerances.match'],
                 max(initial) <= config['tolerances.match'])
    result.check('gronwall_residual_monotone', worst, 'non-decreasing',
                 bool(np.all(np.diff(worst) >= -config['tolerances.gronwall_abs'])))
    result.informational.update({'E_tau': energies, 'orders': orders.tolist(), 'matched_decay': decays})

    if config['output.plot']:
        result.files.append(plot_series(np.array(levels), {'E(tau)': np.array(energies)},
                                        join(out_dir, 'weak_strong.png'), 'cells', 'E(tau)', log=True))
    return result

#%% finite-speed

def run_finite_speed(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    '''
    Support growth of a small perturbation on several grids. The measured
    speeds carry a diffusive excess that vanishes under refinement; the
    extrapolated speed is held against the flux-domination constant.
    '''
    result = ExperimentResult()
    g = gas_params(config)
    cfg = solver_config(config)
    rho_bar, vel_bar = background(config)
    threshold = config['finite_speed.threshold']
    center = config['initial.center']
    c_sound = float(sound_speed(rho_bar, g))

    rows, boxes = [], []
    for n in _levels(config, 'finite_speed.levels'):
        traj = simulate(strong_initial(config, make_grid(config, n)), cfg)
        speed, intercept = propagation_speed(traj, (rho_bar, vel_bar), threshold, center)
        boxes.append(realized_box(traj, None, g.gamma))
        c_bound = lemma_constant_grid(boxes[-1], 1, config['lemma.grid_n'], workers)
        radii = support_radii(traj, (rho_bar, vel_bar), threshold, center)

        rows.append({'n_cells': n, 'dx': traj.grid.dx, 'speed': speed, 'intercept': intercept,
                     'c_bound': c_bound, 'speed_over_sound': speed / c_sound})
        result.files.append(write_speed_csv(traj.times, radii, speed, intercept, c_bound,
                                            join(out_dir, f'finite_speed_N{n}.csv')))
        if config['output.plot']:
            result.files.append(plot_support(traj.times, radii, speed, intercept, c_bound,
                                             join(out_dir, f'finite_speed_N{n}.png')))
        logger.info(f"N={n}: speed {speed:.5g} (bound {c_bound:.5g}, sound speed ratio {speed / c_sound:.4f}).")

    speeds = np.array([row['speed'] for row in rows])
    c_bound = lemma_constant_grid(union_box(boxes), 1, config['lemma.grid_n'], workers)
    limit, excess = extrapolated_speed([row['dx'] for row in rows], speeds, config['finite_speed.order'])
    result.check('speed_excess_decreasing', speeds.tolist(), 'decreasing', bool(np.all(np.diff(speeds) < 0)))
    result.check('extrapolated_speed', limit, c_bound, limit <= c_bound)

    result.files.append(write_table(rows, join(out_dir, 'finite_speed.csv')))
    result.informational.update({
        'sound_speed': c_sound,
        'speed_over_sound': [row['speed_over_sound'] for row in rows],
        'extrapolated_over_sound': limit / c_sound,
        'excess_coefficient': excess,
        'speed_within_bound': {f"N{row['n_cells']}": row['speed'] <= row['c_bound'] for row in rows},
    })
    return result

#%% incompressible

def _strip_profile(y):
    return y + np.maximum(y - 2.0, 0.0) ** 2


def _strip_profile_derivative(y):
    return 1.0 + 2.0 * np.maximum(y - 2.0, 0.0)


def incompressible_pairs(config: Mapping[str, Any]) -> Dict[str, Tuple[Any, Any, TransportedCutoff]]:
    ''' name -> (weakish, strong, cutoff) for the shipped comparisons '''
    speed = config['incompressible.cutoff_speed']
    circulation = config['incompressible.circulation']
    drift = config['incompressible.translation']
    return {
        'vortex_rest': (
            rest(),
            vortex(circulation),
            TransportedCutoff(RadialBump((2.5, 0.0), 1.0), speed),
        ),
        'shear_shear': (
            shear(lambda y: y, lambda y: np.ones_like(y)),
            shear(_strip_profile, _strip_profile_derivative),
            TransportedCutoff(RadialBump((0.0, 0.0), 1.0), speed),
        ),
        'translating_vortex_drift': (
            translating_vortex(drift, circulation=0.0),
            translating_vortex(drift, circulation, config['incompressible.vortex_center']),
            TransportedCutoff(
                RadialBump(config['incompressible.cutoff_center'], config['incompressible.cutoff_eta']), speed
            ),
        ),
    }


def run_incompressible(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    ''' Exactness of the closed-form catalog and the localized energy inequality for solution pairs '''
    result = ExperimentResult()
    rng = np.random.default_rng(config['seed'])
    circulation = config['incompressible.circulation']
    catalog = {
        'rest': rest(),
        'shear': shear(_strip_profile, _strip_profile_derivative),
        'vortex': vortex(circulation),
        'translating_vortex': translating_vortex(config['incompressible.translation'], circulation,
                                                 config['incompressible.vortex_center']),
    }

    rows = []
    for name, solution in catalog.items():
        residual = residual_check(solution, config['incompressible.samples'], rng, config['incompressible.fd_step'])
        result.check(f'residual_{name}', residual, config['tolerances.residual'], residual <= config['tolerances.residual'])
        rows.append({'kind': 'residual', 'name': name, 'tau': np.nan, 'lhs': residual, 'rhs': np.nan})

    tol = config['tolerances.incompressible']
    for name, (weakish, strong, c) in incompressible_pairs(config).items():
        for tau in config['incompressible.taus']:
            lhs, rhs = incompressible_gronwall(
                weakish, strong, c, tau, config['incompressible.quad_n'], config['incompressible.n_time'],
                config['tolerances.match'],
            )
            result.check(f'{name}_tau{tau:g}', lhs - rhs, tol, lhs <= rhs + tol)
            rows.append({'kind': 'inequality', 'name': name, 'tau': tau, 'lhs': lhs, 'rhs': rhs})

    result.files.append(write_table(rows, join(out_dir, 'incompressible.csv')))
    return result

#%% lemma-sweep

def _box_properties(box: StateBox, config: Mapping[str, Any], rng: np.random.Generator,
                    workers: int) -> List[Tuple[str, Any, Any, bool]]:
    g = box.gas
    n = config['lemma.samples']
    grid_n = config['lemma.grid_n']
    strong, weak = sample_states(box, n, rng)
    A = rel_energy_density_A(strong, weak, g)
    potential = relative_potential(strong.rho, weak.rho, g)
    properties = []

    worst = float(np.min(A))
    properties.append(('nonnegativity', worst, -config['tolerances.nonneg'], worst >= -config['tolerances.nonneg']))

    unidentified = identification_violations(box, n, rng, zero_tol=config['tolerances.identity'])
    properties.append(('identification', unidentified, 0, unidentified == 0))

    if box.gamma == 2.0:
        gap = float(np.max(np.abs(potential - (strong.rho - weak.rho) ** 2)))
        properties.append(('gamma2_identity', gap, config['tolerances.identity'], gap <= config['tolerances.identity']))

    c_grid = lemma_constant_grid(box, 1, grid_n, workers)
    c_fine = lemma_constant_grid(box, 1, 2 * grid_n, workers)
    change = abs(c_fine - c_grid) / c_grid
    properties.append(('grid_refinement', change, config['tolerances.refinement'],
                       change < config['tolerances.refinement']))

    if box.r_lo > 0:
        c_quad = quadratic_bound_constant(box)
        slack = float(np.min(potential - c_quad * (strong.rho - weak.rho) ** 2))
        properties.append(('quadratic_lower_bound', slack, -config['tolerances.identity'],
                           slack >= -config['tolerances.identity']))
        c_analytic = lemma_constant_analytic(box)
        properties.append(('analytic_ordering', c_analytic, c_grid / SAFETY_FACTOR, c_analytic >= c_grid / SAFETY_FACTOR))

    violations = flux_domination_violations(box, c_grid, n, rng)
    properties.append(('flux_domination_violations', violations, 0, violations == 0))

    exceed = direction_check(box, c_grid, config['lemma.direction_samples'], rng, dim=2)
    properties.append(('direction_check', exceed, 0, exceed == 0))

    # informational: the potential is symmetric only for gamma = 2
    asymmetry = float(np.max(np.abs(potential - relative_potential(weak.rho, strong.rho, g))))
    properties.append(('bregman_asymmetry', asymmetry, None, True))
    properties.append(('C_grid', c_grid, None, True))
    return properties


def run_lemma_sweep(config: Mapping[str, Any], out_dir: str, workers: int = 1) -> ExperimentResult:
    ''' Every state-space property of the relative energy, per gamma and per box '''
    result = ExperimentResult()
    rng = np.random.default_rng(config['seed'])
    boxes = np.asarray(config['lemma.boxes'], dtype=float).reshape(-1, 3)

    rows = []
    skipped = []
    for gamma in config['lemma.gammas']:
        for r_lo, r_hi, v_max in boxes:
            try:
                box = StateBox(r_lo, r_hi, v_max, gamma)
            except HypothesisError as err:
                skipped.append({'gamma': gamma, 'box': [r_lo, r_hi, v_max], 'reason': str(err)})
                logger.info(f"Skipping box ({r_lo:g}, {r_hi:g}, {v_max:g}) for gamma={gamma:g}: {err}")
                continue
            tag = f"g{gamma:g}_box{r_lo:g}-{r_hi:g}-{v_max:g}"
            for name, value, limit, passed in _box_properties(box, config, rng, workers):
                rows.append({'gamma': gamma, 'r_lo': r_lo, 'r_hi': r_hi, 'v_max': v_max, 'property': name,
                             'value': value, 'limit': limit, 'passed': passed})
                if limit is not None:
                    result.check(f'{tag}_{name}', value, limit, passed)

    result.informational['skipped_boxes'] = skipped
    result.files.append(write_table(rows, join(out_dir, 'lemma_sweep.csv')))
    return result

#%% Registry

RUNNERS: Dict[str, Callable[[Mapping[str, Any], str, int], ExperimentResult]] = {
    'constant': run_constant,
    'simulate': run_simulate,
    'weak-strong': run_weak_strong,
    'finite-speed': run_finite_speed,
    'gronwall': run_gronwall,
    'incompressible': run_incompressible,
    'lemma-sweep': run_lemma_sweep,
}

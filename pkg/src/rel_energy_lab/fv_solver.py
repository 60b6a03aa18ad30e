#%% Relevant packages

import io
import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

#%% Custom packages

from .core.errors import DomainCoverageError, DomainError, NumericalBlowupError
from .cutoff import hermite_profile
from .gas_core import GasParams

logger = logging.getLogger(__name__)

#%% Constants

BOUNDARY_CONDITIONS = ('periodic', 'copy-out')
VACUUM_EPS = 1e-12
BOUNDARY_TOL = 1e-10 # allowed drift of copy-out boundary cells
MAX_CFL = 0.5
NEGATIVE_TOL = 1e-12 # round-off negatives, relative to the largest density of the step

ArrayLike = Union[float, np.ndarray]

#%% Domain types

@dataclass(frozen=True)
class Grid1D:
    ''' Uniform cell grid on [x_min, x_max] '''

    x_min: float
    x_max: float
    n_cells: int
    bc: str = 'periodic'

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"Grid needs n_cells >= 4, got {self.n_cells}.")
        if not self.x_max > self.x_min:
            raise ValueError(f"Grid needs x_max > x_min, got [{self.x_min}, {self.x_max}].")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"Unknown boundary condition '{self.bc}', expected one of {BOUNDARY_CONDITIONS}.")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def refined(self, factor: int) -> 'Grid1D':
        return Grid1D(self.x_min, self.x_max, self.n_cells * factor, self.bc)


@dataclass(frozen=True)
class ConservedState:
    ''' Density and momentum density, scalars or arrays of equal shape '''

    rho: np.ndarray
    mom: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        mom = np.asarray(self.mom, dtype=float)
        if rho.shape != mom.shape:
            raise DomainError(f"Density shape {rho.shape} differs from momentum shape {mom.shape}.")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mom))):
            raise DomainError("Conserved state must be finite.")
        if np.any(rho < 0):
            raise DomainError("Density must be >= 0.")
        if np.any((rho == 0) & (mom != 0)):
            raise DomainError("Vacuum cells must carry zero momentum.")
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'mom', mom)

    def velocity(self, vacuum_eps: float = VACUUM_EPS) -> np.ndarray:
        return _velocity(self.rho, self.mom, vacuum_eps)


@dataclass(frozen=True)
class SolverConfig:
    '''
    Parameters
    ----------
    cfl : float
        Courant number in (0, 0.5].
    gamma : float
        Adiabatic exponent.
    t_end : float
        Final time of a run.
    snapshot_dt : float
        Spacing of recorded snapshots.
    vacuum_eps : float
        Densities at or below this carry no velocity.
    '''

    cfl: float
    gamma: float
    t_end: float
    snapshot_dt: float
    vacuum_eps: float = VACUUM_EPS

    def __post_init__(self):
        if not 0 < self.cfl <= MAX_CFL:
            raise ValueError(f"cfl must lie in (0, {MAX_CFL}], got {self.cfl}.")
        GasParams(self.gamma)
        if not self.t_end > 0:
            raise ValueError(f"t_end must be > 0, got {self.t_end}.")
        if not self.snapshot_dt > 0:
            raise ValueError(f"snapshot_dt must be > 0, got {self.snapshot_dt}.")
        if self.vacuum_eps < 0:
            raise ValueError(f"vacuum_eps must be >= 0, got {self.vacuum_eps}.")

    @property
    def gas(self) -> GasParams:
        return GasParams(self.gamma)


@dataclass(frozen=True)
class Field:
    ''' Cell averages of (rho, rho u) on a grid at one time; read-only '''

    grid: Grid1D
    rho: np.ndarray
    mom: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        state = ConservedState(self.rho, self.mom)
        if state.rho.shape != (self.grid.n_cells,):
            raise DomainError(
                f"Field has {state.rho.shape} cells, grid expects ({self.grid.n_cells},)."
            )
        rho = state.rho.copy()
        mom = state.mom.copy()
        rho.setflags(write=False)
        mom.setflags(write=False)
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'mom', mom)
        object.__setattr__(self, 'time', float(self.time))

    @property
    def cells(self) -> ConservedState:
        return ConservedState(self.rho, self.mom)

    def velocity(self, vacuum_eps: float = VACUUM_EPS) -> np.ndarray:
        return _velocity(self.rho, self.mom, vacuum_eps)

    def energy(self, g: GasParams, vacuum_eps: float = VACUUM_EPS) -> np.ndarray:
        return _energy(self.rho, self.velocity(vacuum_eps), g.gamma)

    def total_mass(self) -> float:
        return float(np.sum(self.rho) * self.grid.dx)

    def total_momentum(self) -> float:
        return float(np.sum(self.mom) * self.grid.dx)

    def total_energy(self, g: GasParams, vacuum_eps: float = VACUUM_EPS) -> float:
        return float(np.sum(self.energy(g, vacuum_eps)) * self.grid.dx)


@dataclass
class Trajectory:
    '''
    Time-ordered snapshots of one run plus the per-step production record.

    Attributes
    ----------
    snapshots : list of Field
        Strictly increasing times on one grid.
    config : SolverConfig
        Configuration of the run.
    step_times : np.ndarray
        Time reached by every step.
    production_max : np.ndarray
        Largest cell energy production of every step.
    energy_max : np.ndarray
        Largest cell energy of every step.
    clipped_cells : int
        Round-off negative densities set to zero over the run.
    clipped_mass : float
        Mass added by those clips.
    '''

    snapshots: List[Field]
    config: SolverConfig
    step_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    production_max: np.ndarray = field(default_factory=lambda: np.zeros(0))
    energy_max: np.ndarray = field(default_factory=lambda: np.zeros(0))
    clipped_cells: int = 0
    clipped_mass: float = 0.0

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("A trajectory needs at least one snapshot.")
        grid = self.snapshots[0].grid
        if any(f.grid != grid for f in self.snapshots):
            raise ValueError("All snapshots of a trajectory must share one grid.")
        times = np.array([f.time for f in self.snapshots])
        if np.any(np.diff(times) <= 0):
            raise ValueError("Snapshot times must be strictly increasing.")

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Field]:
        return iter(self.snapshots)

    def __getitem__(self, index: int) -> Field:
        return self.snapshots[index]

    @property
    def grid(self) -> Grid1D:
        return self.snapshots[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.snapshots])

#%% Helpers

def _velocity(rho: np.ndarray, mom: np.ndarray, vacuum_eps: float) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    mom = np.asarray(mom, dtype=float)
    wet = rho > vacuum_eps
    return np.where(wet, mom / np.where(wet, rho, 1.0), 0.0)


def _energy(rho: np.ndarray, u: np.ndarray, gamma: float) -> np.ndarray:
    return 0.5 * rho * u ** 2 + rho ** gamma / (gamma - 1)


def _energy_flux(rho: np.ndarray, u: np.ndarray, gamma: float) -> np.ndarray:
    return (0.5 * rho * u ** 2 + gamma / (gamma - 1) * rho ** gamma) * u


def _with_ghosts(a: np.ndarray, bc: str) -> np.ndarray:
    if bc == 'periodic':
        return np.concatenate((a[-1:], a, a[:1]))
    return np.concatenate((a[:1], a, a[-1:]))

#%% Fluxes

def physical_flux(
        s: ConservedState,
        g: GasParams,
        vacuum_eps: float = VACUUM_EPS) -> Tuple[np.ndarray, np.ndarray]:
    ''' (rho u, rho u^2 + rho^gamma) '''
    u = s.velocity(vacuum_eps)
    return s.mom * 1.0, s.mom * u + s.rho ** g.gamma


def llf_interface_flux(
        left: ConservedState,
        right: ConservedState,
        g: GasParams,
        vacuum_eps: float = VACUUM_EPS) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    '''
    Local Lax-Friedrichs (Rusanov) flux across an interface.

    Parameters
    ----------
    left, right : ConservedState
        States on either side; arrays give one interface per entry.
    g : GasParams
        Gas parameters.
    vacuum_eps : float
        Vacuum threshold of the velocity reconstruction.

    Returns
    -------
    tuple
        (mass flux, momentum flux, lambda) with
        lambda = max(|u_L| + c_L, |u_R| + c_R) and
        F = (F(L) + F(R)) / 2 - lambda (U_R - U_L) / 2.

    '''
    mass_l, mom_l = physical_flux(left, g, vacuum_eps)
    mass_r, mom_r = physical_flux(right, g, vacuum_eps)
    lam = np.maximum(
        np.abs(left.velocity(vacuum_eps)) + np.sqrt(g.gamma * left.rho ** (g.gamma - 1)),
        np.abs(right.velocity(vacuum_eps)) + np.sqrt(g.gamma * right.rho ** (g.gamma - 1)),
    )
    f_mass = 0.5 * (mass_l + mass_r) - 0.5 * lam * (right.rho - left.rho)
    f_mom = 0.5 * (mom_l + mom_r) - 0.5 * lam * (right.mom - left.mom)
    return f_mass, f_mom, lam

#%% Time stepping

def _advance(f: Field, cfg: SolverConfig, dt_max: float = np.inf):
    ''' One forward-Euler step; returns (rho, mom, production, dt, clipped cells, clipped mass) '''
    g = cfg.gas
    eps = cfg.vacuum_eps
    grid = f.grid
    dx = grid.dx

    rho_e = _with_ghosts(f.rho, grid.bc)
    mom_e = _with_ghosts(f.mom, grid.bc)
    left = ConservedState(rho_e[:-1], mom_e[:-1])
    right = ConservedState(rho_e[1:], mom_e[1:])
    f_mass, f_mom, lam = llf_interface_flux(left, right, g, eps)

    lam_max = float(np.max(lam))
    dt = cfg.cfl * dx / lam_max if lam_max > 0 else cfg.snapshot_dt
    dt = min(dt, dt_max)

    with np.errstate(all='ignore'):
        rho_new = f.rho - dt / dx * np.diff(f_mass)
        mom_new = f.mom - dt / dx * np.diff(f_mom)

    bad = ~(np.isfinite(rho_new) & np.isfinite(mom_new))
    if np.any(bad):
        raise NumericalBlowupError(int(np.argmax(bad)), f.time + dt)

    floor = -NEGATIVE_TOL * float(np.max(rho_e))
    lost = rho_new < floor
    if np.any(lost):
        cell = int(np.argmax(lost))
        raise NumericalBlowupError(
            cell,
            f.time + dt,
            f"Negative density {rho_new[cell]:.3g} in cell {cell} at t={f.time + dt:.6g}; "
            f"the update lost positivity (cfl={cfg.cfl}).",
        )
    negative = rho_new < 0
    clipped_cells = int(np.count_nonzero(negative))
    clipped_mass = float(-np.sum(rho_new[negative]) * dx)
    if clipped_cells:
        logger.debug(f"Clipping {clipped_cells} round-off negative densities at t={f.time + dt:.6g}.")
        rho_new = np.where(negative, 0.0, rho_new)
    mom_new = np.where(rho_new > eps, mom_new, 0.0)

    # energy production with the paired numerical energy flux
    u_e = _velocity(rho_e, mom_e, eps)
    E_e = _energy(rho_e, u_e, g.gamma)
    Q_e = _energy_flux(rho_e, u_e, g.gamma)
    q_hat = 0.5 * (Q_e[:-1] + Q_e[1:]) - 0.5 * lam * (E_e[1:] - E_e[:-1])
    E_new = _energy(rho_new, _velocity(rho_new, mom_new, eps), g.gamma)
    production = (E_new - E_e[1:-1]) / dt + np.diff(q_hat) / dx

    return rho_new, mom_new, production, dt, clipped_cells, clipped_mass


def step(f: Field, cfg: SolverConfig) -> Tuple[Field, np.ndarray]:
    '''
    One conservative forward-Euler update with dt = cfl dx / max lambda.

    Parameters
    ----------
    f : Field
        Current field.
    cfg : SolverConfig
        Solver configuration.

    Raises
    ------
    NumericalBlowupError
        Non-finite state or a negative density beyond round-off after the
        update; carries the cell index.

    Returns
    -------
    tuple
        (new field, per-cell energy production P_i).

    '''
    rho, mom, production, dt, _, _ = _advance(f, cfg)
    return Field(f.grid, rho, mom, f.time + dt), production


def _snapshot_targets(t0: float, t_end: float, snapshot_dt: float) -> List[float]:
    targets = []
    k = 1
    tol = 1e-12 * max(1.0, abs(t_end))
    while t0 + k * snapshot_dt < t_end - tol:
        targets.append(t0 + k * snapshot_dt)
        k += 1
    if t_end > t0:
        targets.append(t_end)
    return targets


def _check_boundary(f: Field, reference: Field) -> None:
    drift = np.abs(f.rho[[0, -1]] - reference.rho[[0, -1]]) + np.abs(f.mom[[0, -1]] - reference.mom[[0, -1]])
    if np.any(drift > BOUNDARY_TOL):
        raise DomainCoverageError(
            f"Waves reached the copy-out boundary by t={f.time:.6g} (drift {np.max(drift):.3g}); enlarge the domain."
        )


def simulate(init: Field, cfg: SolverConfig) -> Trajectory:
    '''
    Step from init to cfg.t_end, keeping a snapshot every cfg.snapshot_dt.
    The step before each snapshot is shortened to land on it exactly.

    Raises
    ------
    NumericalBlowupError
        A step produced a non-finite state or lost positivity.
    DomainCoverageError
        Copy-out boundary cells drifted from their initial state.
    '''
    snapshots = [init]
    step_times: List[float] = []
    production_max: List[float] = []
    energy_max: List[float] = []
    clipped_cells = 0
    clipped_mass = 0.0
    g = cfg.gas

    current = init
    for target in _snapshot_targets(init.time, cfg.t_end, cfg.snapshot_dt):
        while current.time < target:
            remaining = target - current.time
            rho, mom, production, dt, cells, mass = _advance(current, cfg, remaining)
            clipped_cells += cells
            clipped_mass += mass
            t_new = target if dt >= remaining else current.time + dt
            current = Field(init.grid, rho, mom, t_new)
            step_times.append(t_new)
            production_max.append(float(np.max(production)))
            energy_max.append(float(np.max(current.energy(g, cfg.vacuum_eps))))
        if init.grid.bc == 'copy-out':
            _check_boundary(current, init)
        snapshots.append(current)

    logger.info(
        f"Simulated {len(step_times)} steps to t={current.time:.6g} on {init.grid.n_cells} cells."
    )
    return Trajectory(
        snapshots,
        cfg,
        np.array(step_times),
        np.array(production_max),
        np.array(energy_max),
        clipped_cells,
        clipped_mass,
    )

#%% Initial data

def constant_field(grid: Grid1D, rho: float, vel: float = 0.0, time: float = 0.0) -> Field:
    return Field(grid, np.full(grid.n_cells, float(rho)), np.full(grid.n_cells, rho * vel), time)


def bump_field(
        grid: Grid1D,
        background: Tuple[float, float],
        amplitude: float,
        half_width: float,
        center: float = 0.0,
        time: float = 0.0) -> Field:
    '''
    Background state plus a Hermite-profile density bump of given half-width;
    the velocity stays at the background value.

    Parameters
    ----------
    grid : Grid1D
        Grid.
    background : tuple
        (rho_bar, u_bar).
    amplitude : float
        Peak density increment.
    half_width : float
        Support radius of the bump.
    center : float
        Bump centre.
    time : float
        Time stamp of the field.

    Returns
    -------
    Field

    '''
    rho_bar, u_bar = background
    rho = rho_bar + amplitude * hermite_profile(np.abs(grid.centers - center), half_width)
    return Field(grid, rho, rho * u_bar, time)

#%% Trajectory files

_HEADER = re.compile(r'(\w+)=(\S+)')


def write_trajectory(traj: Trajectory, filepath: str) -> None:
    '''
    One file per run: a '# run ...' metadata line, then per snapshot the line
    '# t=<time> n=<cells> dx=<dx> gamma=<gamma>' and a CSV block i,x_center,rho,mom.
    '''
    grid = traj.grid
    cfg = traj.config
    buffer = io.StringIO()
    buffer.write(
        f"# run x_min={grid.x_min!r} x_max={grid.x_max!r} bc={grid.bc} cfl={cfg.cfl!r} "
        f"vacuum_eps={cfg.vacuum_eps!r} t_end={cfg.t_end!r} snapshot_dt={cfg.snapshot_dt!r}\n"
    )
    for f in traj:
        buffer.write(f"# t={f.time!r} n={grid.n_cells} dx={grid.dx!r} gamma={cfg.gamma!r}\n")
        block = pd.DataFrame({
            'i': np.arange(grid.n_cells),
            'x_center': grid.centers,
            'rho': f.rho,
            'mom': f.mom,
        })
        block.to_csv(buffer, index=False, float_format='%.17g')
    with open(filepath, 'w', encoding='utf-8', newline='') as handle:
        handle.write(buffer.getvalue())


def read_trajectory(filepath: str) -> Trajectory:
    '''
    Inverse of write_trajectory; floats come back bit for bit.

    Raises
    ------
    FileNotFoundError
        Missing file.
    ValueError
        Malformed file.
    '''
    try:
        with open(filepath, 'r', encoding='utf-8') as handle:
            lines = handle.read().splitlines()
    except FileNotFoundError:
        raise FileNotFoundError(f"Trajectory file not found: {filepath}")

    if not lines or not lines[0].startswith('# run'):
        raise ValueError(f"'{filepath}' does not start with a '# run' metadata line.")
    meta = dict(_HEADER.findall(lines[0]))

    blocks: List[Tuple[dict, List[str]]] = []
    for line in lines[1:]:
        if line.startswith('# t='):
            blocks.append((dict(_HEADER.findall(line)), []))
        elif line.strip():
            if not blocks:
                raise ValueError(f"Data before the first snapshot header in '{filepath}'.")
            blocks[-1][1].append(line)
    if not blocks:
        raise ValueError(f"No snapshots in '{filepath}'.")

    header = blocks[0][0]
    try:
        grid = Grid1D(float(meta['x_min']), float(meta['x_max']), int(header['n']), meta['bc'])
        cfg = SolverConfig(
            cfl=float(meta['cfl']),
            gamma=float(header['gamma']),
            t_end=float(meta['t_end']),
            snapshot_dt=float(meta['snapshot_dt']),
            vacuum_eps=float(meta['vacuum_eps']),
        )
    except KeyError as err:
        raise ValueError(f"Missing metadata key {err} in '{filepath}'.") from err

    snapshots = []
    for head, rows in blocks:
        df = pd.read_csv(io.StringIO('\n'.join(rows)), float_precision='round_trip')
        if list(df.columns) != ['i', 'x_center', 'rho', 'mom']:
            raise ValueError(f"Unexpected columns {list(df.columns)} in '{filepath}'.")
        snapshots.append(Field(grid, df.rho.to_numpy(dtype=float), df.mom.to_numpy(dtype=float), float(head['t'])))
    return Trajectory(snapshots, cfg)

#%% Relevant packages

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

#%% Custom packages

from .fv_solver import Field, SolverConfig, Trajectory, simulate

logger = logging.getLogger(__name__)

#%% Constants

MIN_REFINE = 8
MONITOR_LIMIT = 5.0 # allowed growth of the gradient monitor over its baseline
FD_STEP = 1e-4
SEAM_WIDTH = 4.0 # excluded band around the vortex edge, in units of h (1 + |V|)
VORTEX_RADIUS = 1.0

#%% Compressible strong solutions

@dataclass(frozen=True)
class StrongSolution1D:
    '''
    Strong solution (R, U) of the isentropic Euler equations in 1-D.

    Either an exact constant state or a fine-grid reference run that is
    interpolated linearly in x and t.

    Attributes
    ----------
    kind : str
        'constant' or 'reference'.
    rho_bar, vel_bar : float
        State of a constant solution.
    trajectory : Trajectory
        Fine run of a reference solution.
    refine : int
        Refinement factor of the fine run over the weak run.
    monitor : np.ndarray
        max |du/dx| at every reference snapshot.
    monitor_baseline : float
        Initial gradient scale the monitor is compared against.
    monitor_limit : float
        Allowed monitor growth factor.
    '''

    kind: str
    rho_bar: float = 0.0
    vel_bar: float = 0.0
    trajectory: Optional[Trajectory] = None
    refine: int = 1
    monitor: np.ndarray = field(default_factory=lambda: np.zeros(0))
    monitor_baseline: float = 0.0
    monitor_limit: float = MONITOR_LIMIT

    def __post_init__(self):
        if self.kind not in ('constant', 'reference'):
            raise ValueError(f"Unknown strong solution kind '{self.kind}'.")
        if self.kind == 'constant' and self.rho_bar < 0:
            raise ValueError(f"Constant density must be >= 0, got {self.rho_bar}.")
        if self.kind == 'reference':
            if self.trajectory is None:
                raise ValueError("A reference solution needs a trajectory.")
            if self.refine < MIN_REFINE:
                raise ValueError(f"Reference refinement must be >= {MIN_REFINE}, got {self.refine}.")

    @property
    def smooth(self) -> bool:
        if self.kind == 'constant':
            return True
        if self.monitor_baseline <= 0:
            return bool(np.all(self.monitor <= 0))
        return bool(np.all(self.monitor <= self.monitor_limit * self.monitor_baseline))

    @property
    def monitor_ratio(self) -> float:
        ''' Largest monitor value over its baseline '''
        if self.kind == 'constant' or self.monitor.size == 0:
            return 0.0
        if self.monitor_baseline <= 0:
            return 0.0 if np.all(self.monitor <= 0) else np.inf
        return float(np.max(self.monitor) / self.monitor_baseline)

    @property
    def times(self) -> np.ndarray:
        if self.kind == 'constant':
            return np.zeros(0)
        return self.trajectory.times

    def _snapshot_values(self, index: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        f = self.trajectory[index]
        grid = f.grid
        u = f.velocity(self.trajectory.config.vacuum_eps)
        period = grid.x_max - grid.x_min if grid.bc == 'periodic' else None
        R = np.interp(x, grid.centers, f.rho, period=period)
        U = np.interp(x, grid.centers, u, period=period)
        return R, U

    def evaluate(self, x: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
        '''
        (R, U) at the points x and the single time t.

        Raises
        ------
        ValueError
            t outside the time span of a reference run.
        '''
        x = np.asarray(x, dtype=float)
        if self.kind == 'constant':
            return np.full(x.shape, float(self.rho_bar)), np.full(x.shape, float(self.vel_bar))

        times = self.times
        tol = 1e-12 * max(1.0, abs(times[-1]))
        if t < times[0] - tol or t > times[-1] + tol:
            raise ValueError(
                f"Reference solution covers t in [{times[0]:.6g}, {times[-1]:.6g}], got t={t:.6g}."
            )
        k = int(np.argmin(np.abs(times - t)))
        if abs(times[k] - t) <= tol:
            return self._snapshot_values(k, x)

        hi = int(np.searchsorted(times, t))
        lo = hi - 1
        R_lo, U_lo = self._snapshot_values(lo, x)
        R_hi, U_hi = self._snapshot_values(hi, x)
        w = (t - times[lo]) / (times[hi] - times[lo])
        return (1.0 - w) * R_lo + w * R_hi, (1.0 - w) * U_lo + w * U_hi


def constant_strong(rho_bar: float, vel_bar: float = 0.0) -> StrongSolution1D:
    ''' Exact constant solution (R, U) = (rho_bar, vel_bar) '''
    return StrongSolution1D('constant', float(rho_bar), float(vel_bar))


def _velocity_gradient_max(f: Field, vacuum_eps: float) -> float:
    u = f.velocity(vacuum_eps)
    return float(np.max(np.abs(np.diff(u))) / f.grid.dx)


def _acoustic_gradient_max(f: Field, gamma: float, vacuum_eps: float) -> float:
    rho_mid = 0.5 * (f.rho[1:] + f.rho[:-1])
    wet = rho_mid > vacuum_eps
    scale = np.where(wet, np.sqrt(gamma * rho_mid ** (gamma - 1)) / np.where(wet, rho_mid, 1.0), 0.0)
    return float(np.max(scale * np.abs(np.diff(f.rho))) / f.grid.dx)


def _refine_field(init: Field, refine: int) -> Field:
    ''' Piecewise-constant injection of cell averages onto a refine-times finer grid '''
    grid = init.grid.refined(refine)
    return Field(grid, np.repeat(init.rho, refine), np.repeat(init.mom, refine), init.time)


def reference_strong(
        init: Field,
        refine: int,
        cfg: SolverConfig,
        monitor_limit: float = MONITOR_LIMIT,
        fine_init: Optional[Callable] = None) -> StrongSolution1D:
    '''
    Reference strong solution from a refined run of the same scheme.

    Parameters
    ----------
    init : Field
        Initial data on the weak grid.
    refine : int
        Refinement factor, at least 8.
    cfg : SolverConfig
        Solver configuration shared with the weak run.
    monitor_limit : float
        The run is flagged not smooth once max |du/dx| exceeds this multiple
        of its baseline.
    fine_init : callable, optional
        fine_init(grid) -> Field sampling the initial data on the fine grid.
        Without it the weak cell averages are injected.

    Returns
    -------
    StrongSolution1D
        Constant data give the exact constant solution.

    '''
    if refine < MIN_REFINE:
        raise ValueError(f"Reference refinement must be >= {MIN_REFINE}, got {refine}.")
    if np.ptp(init.rho) == 0 and np.ptp(init.mom) == 0:
        logger.debug("Constant initial data, using the exact constant solution.")
        return constant_strong(init.rho[0], init.velocity(cfg.vacuum_eps)[0])

    fine = fine_init(init.grid.refined(refine)) if fine_init is not None else _refine_field(init, refine)
    trajectory = simulate(fine, cfg)
    monitor = np.array([_velocity_gradient_max(f, cfg.vacuum_eps) for f in trajectory])
    baseline = max(monitor[0], _acoustic_gradient_max(fine, cfg.gamma, cfg.vacuum_eps))

    solution = StrongSolution1D(
        'reference',
        trajectory=trajectory,
        refine=refine,
        monitor=monitor,
        monitor_baseline=baseline,
        monitor_limit=monitor_limit,
    )
    if solution.smooth:
        logger.info(f"Reference run on {fine.grid.n_cells} cells stays smooth (monitor ratio {solution.monitor_ratio:.3g}).")
    else:
        breach = trajectory.times[np.argmax(monitor > monitor_limit * baseline)]
        logger.warning(
            f"Reference run breached its gradient monitor at t={breach:.6g} "
            f"(ratio {solution.monitor_ratio:.3g} > {monitor_limit:g})."
        )
    return solution

#%% Incompressible solutions

INCOMPRESSIBLE_KINDS = ('rest', 'shear', 'vortex', 'translating_vortex')


@dataclass(frozen=True)
class IncompressibleSolution2D:
    '''
    Closed-form solution (U, P) of the 2-D incompressible Euler equations.

    Attributes
    ----------
    kind : str
        'rest', 'shear', 'vortex' or 'translating_vortex'.
    circulation : float
        Strength of the vortex profile v(r) = circulation r (1 - r^2)^2.
    center : tuple
        Vortex centre at t = 0.
    translation : tuple
        Constant drift velocity of a translating vortex.
    profile, profile_derivative : callable
        Shear profile f(x2) and its derivative.
    '''

    kind: str
    circulation: float = 1.0
    center: Tuple[float, float] = (0.0, 0.0)
    translation: Tuple[float, float] = (0.0, 0.0)
    profile: Optional[Callable] = None
    profile_derivative: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in INCOMPRESSIBLE_KINDS:
            raise ValueError(f"Unknown incompressible solution '{self.kind}', expected one of {INCOMPRESSIBLE_KINDS}.")
        if self.kind == 'shear' and (self.profile is None or self.profile_derivative is None):
            raise ValueError("A shear flow needs its profile and the profile derivative.")
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))
        object.__setattr__(self, 'translation', tuple(float(v) for v in self.translation))

    @property
    def drift(self) -> np.ndarray:
        if self.kind == 'translating_vortex':
            return np.asarray(self.translation)
        return np.zeros(2)

    def vortex_offset(self, x: np.ndarray, t) -> np.ndarray:
        ''' x - center - V t '''
        t = np.asarray(t, dtype=float)[..., None]
        return np.asarray(x, dtype=float) - np.asarray(self.center) - self.drift * t


def rest() -> IncompressibleSolution2D:
    return IncompressibleSolution2D('rest')


def shear(f: Callable, df: Callable) -> IncompressibleSolution2D:
    return IncompressibleSolution2D('shear', profile=f, profile_derivative=df)


def vortex(circulation: float = 1.0, center=(0.0, 0.0)) -> IncompressibleSolution2D:
    return IncompressibleSolution2D('vortex', circulation=circulation, center=center)


def translating_vortex(translation, circulation: float = 1.0, center=(0.0, 0.0)) -> IncompressibleSolution2D:
    return IncompressibleSolution2D('translating_vortex', circulation=circulation, center=center, translation=translation)


def vortex_pressure(r: np.ndarray, circulation: float = 1.0) -> np.ndarray:
    ''' P(r) = int_0^r v(s)^2 / s ds for v(s) = circulation s (1 - s^2)^2 '''
    q = np.minimum(np.asarray(r, dtype=float) ** 2, VORTEX_RADIUS)
    return circulation ** 2 * (1.0 - (1.0 - q) ** 5) / 10.0


def _vortex_factor(q: np.ndarray, circulation: float) -> np.ndarray:
    return np.where(q < VORTEX_RADIUS, circulation * (1.0 - q) ** 2, 0.0)


def incompressible_eval(s: IncompressibleSolution2D, x: np.ndarray, t) -> Tuple[np.ndarray, np.ndarray]:
    '''
    Velocity and pressure of a closed-form solution.

    Parameters
    ----------
    s : IncompressibleSolution2D
        The solution.
    x : np.ndarray
        Points, shape S + (2,).
    t : float or np.ndarray
        Time(s), broadcastable to S.

    Returns
    -------
    tuple
        (U of shape S + (2,), P of shape S).

    '''
    x = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], np.shape(t))

    if s.kind == 'rest':
        return np.zeros(shape + (2,)), np.zeros(shape)

    if s.kind == 'shear':
        f = np.broadcast_to(s.profile(x[..., 1]), shape)
        return np.stack([f, np.zeros(shape)], axis=-1), np.zeros(shape)

    y = s.vortex_offset(x, t)
    q = np.sum(y ** 2, axis=-1)
    g = _vortex_factor(q, s.circulation)
    U = np.stack([-g * y[..., 1], g * y[..., 0]], axis=-1) + s.drift
    return U, vortex_pressure(np.sqrt(q), s.circulation)


def velocity_gradient(s: IncompressibleSolution2D, x: np.ndarray, t) -> np.ndarray:
    ''' grad U with G[..., i, j] = d_j U_i '''
    x = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(x.shape[:-1], np.shape(t))
    G = np.zeros(shape + (2, 2))

    if s.kind == 'rest':
        return G
    if s.kind == 'shear':
        G[..., 0, 1] = s.profile_derivative(x[..., 1])
        return G

    y = s.vortex_offset(x, t)
    q = np.sum(y ** 2, axis=-1)
    g = _vortex_factor(q, s.circulation)
    dg = np.where(q < VORTEX_RADIUS, -2.0 * s.circulation * (1.0 - q), 0.0) # dg/dq
    y1, y2 = y[..., 0], y[..., 1]
    G[..., 0, 0] = -2.0 * dg * y1 * y2
    G[..., 0, 1] = -g - 2.0 * dg * y2 ** 2
    G[..., 1, 0] = g + 2.0 * dg * y1 ** 2
    G[..., 1, 1] = 2.0 * dg * y1 * y2
    return G


def residual_check(
        s: IncompressibleSolution2D,
        samples: int,
        rng: Optional[np.random.Generator] = None,
        h: float = FD_STEP,
        box: Tuple[Tuple[float, float], Tuple[float, float]] = ((-2.0, 2.0), (-2.0, 2.0)),
        t_span: Tuple[float, float] = (0.0, 1.0)) -> float:
    '''
    Largest centred-difference residual of the momentum equation and of
    div U over random sample points.

    Points whose stencil reaches the edge of a vortex profile are skipped;
    the profile is only C^1 there.

    Parameters
    ----------
    s : IncompressibleSolution2D
        The solution.
    samples : int
        Number of random (x, t) points, at least 1.
    rng : np.random.Generator, optional
        Random source; a generator seeded with 0 when omitted.
    h : float
        Difference step.
    box : tuple
        Sampling rectangle.
    t_span : tuple
        Sampling time interval.

    Returns
    -------
    float
        max of |d_t U + (U . grad) U + grad P| and |div U|.

    '''
    if samples < 1:
        raise ValueError(f"residual_check needs samples >= 1, got {samples}.")
    rng = np.random.default_rng(0) if rng is None else rng
    (x_lo, x_hi), (y_lo, y_hi) = box
    x = np.stack([rng.uniform(x_lo, x_hi, samples), rng.uniform(y_lo, y_hi, samples)], axis=-1)
    t = rng.uniform(t_span[0], t_span[1], samples)

    if s.kind in ('vortex', 'translating_vortex'):
        r = np.linalg.norm(s.vortex_offset(x, t), axis=-1)
        keep = np.abs(r - VORTEX_RADIUS) > SEAM_WIDTH * h * (1.0 + np.linalg.norm(s.drift))
        x, t = x[keep], t[keep]
        if t.size == 0:
            return 0.0

    U, _ = incompressible_eval(s, x, t)
    dtU = (incompressible_eval(s, x, t + h)[0] - incompressible_eval(s, x, t - h)[0]) / (2 * h)

    dU = []
    dP = []
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = h
        U_plus, P_plus = incompressible_eval(s, x + e, t)
        U_minus, P_minus = incompressible_eval(s, x - e, t)
        dU.append((U_plus - U_minus) / (2 * h))
        dP.append((P_plus - P_minus) / (2 * h))

    convection = U[..., 0:1] * dU[0] + U[..., 1:2] * dU[1]
    momentum = dtU + convection + np.stack(dP, axis=-1)
    divergence = dU[0][..., 0] + dU[1][..., 1]
    return float(max(np.max(np.linalg.norm(momentum, axis=-1)), np.max(np.abs(divergence))))

#%% Relevant packages

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

#%% Custom packages

from .core.errors import DomainCoverageError, HypothesisError, InsufficientDataError
from .cutoff import TransportedCutoff, cutoff_eval, sign_condition
from .exact_solutions import IncompressibleSolution2D, StrongSolution1D, incompressible_eval, velocity_gradient
from .fv_solver import VACUUM_EPS, Field, Trajectory
from .gas_core import A_FLOOR, GasParams, PrimitiveState, StateBox, rel_energy_density_A, rel_energy_flux_B

logger = logging.getLogger(__name__)

#%% Constants

NONNEG_TOL = 1e-12 # quadrature of A may dip this far below zero
MATCH_TOL = 1e-10 # matched initial data on supp phi(., 0)
SIGN_TOL = 1e-12 # sign condition slack, relative to 1 + A
GRONWALL_FACTOR = 2.0
MIN_FIT_POINTS = 3
SPEED_EXCESS_ORDER = 0.5 # front smearing of a first-order scheme grows like sqrt(dx t)

#%% Report types

@dataclass(frozen=True)
class RelEnergySeries:
    ''' E^phi_rel at the snapshot times of a run '''

    times: np.ndarray
    values: np.ndarray
    cutoff: TransportedCutoff
    gamma: float

    def __post_init__(self):
        if np.any(np.asarray(self.values) < -NONNEG_TOL):
            raise ValueError(f"Localized relative energy below -{NONNEG_TOL:g}: {np.min(self.values):.3g}.")


@dataclass(frozen=True)
class GronwallReport:
    '''
    Both sides of the localized Gronwall inequality at every snapshot.

    Attributes
    ----------
    times : np.ndarray
        Snapshot times tau.
    lhs : np.ndarray
        E^phi_rel(tau).
    rhs : np.ndarray
        E^phi_rel(0) + int_0^tau int (d_t phi A + grad phi . B) + factor int_0^tau |U|_C1 E.
    c1_norm_trace : np.ndarray
        |U(t)|_C1 over supp phi(., t).
    flux_integral : np.ndarray
        Running time integral of the cutoff-flux term.
    gronwall_integral : np.ndarray
        Running time integral of |U|_C1 E.
    factor : float
        Gronwall factor used in rhs.
    '''

    times: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    c1_norm_trace: np.ndarray
    flux_integral: np.ndarray
    gronwall_integral: np.ndarray
    factor: float = GRONWALL_FACTOR

    @property
    def residual(self) -> np.ndarray:
        return self.rhs - self.lhs

    @property
    def worst_residual(self) -> float:
        return float(np.min(self.residual))

    @property
    def sufficient_factor(self) -> float:
        ''' Smallest Gronwall factor keeping every residual >= 0; inf when none does '''
        need = self.lhs - self.lhs[0] - self.flux_integral
        positive = self.gronwall_integral > 0
        if np.any((need > 0) & ~positive):
            return np.inf
        if not np.any(positive):
            return 0.0
        return float(max(0.0, np.max(need[positive] / self.gronwall_integral[positive])))

    def passed(self, rel_tol: float, abs_tol: float = 0.0) -> bool:
        limit = rel_tol * float(np.max(np.abs(self.lhs))) + abs_tol
        return self.worst_residual >= -limit


class SignSweep(NamedTuple):
    max_value: float
    violations: int
    inapplicable: int
    nodes: int
    matched: int = 0 # nodes with A <= A_FLOOR, where the states coincide

#%% Helpers

def _check_coverage(c: TransportedCutoff, f: Field) -> None:
    if c.bump.dim != 1:
        raise ValueError(f"Compressible diagnostics need a 1-D cutoff, got dimension {c.bump.dim}.")
    r = c.support_radius(f.time)
    if r <= 0:
        return
    x0 = float(c.bump.center[0])
    if x0 - r < f.grid.x_min or x0 + r > f.grid.x_max:
        raise DomainCoverageError(
            f"Cutoff support [{x0 - r:.6g}, {x0 + r:.6g}] at t={f.time:.6g} leaves the grid "
            f"[{f.grid.x_min:.6g}, {f.grid.x_max:.6g}]."
        )


def _state_pair(weak: Field, strong: StrongSolution1D, vacuum_eps: float) -> Tuple[PrimitiveState, PrimitiveState]:
    x = weak.grid.centers
    R, U = strong.evaluate(x, weak.time)
    return PrimitiveState(R, U[:, None]), PrimitiveState(weak.rho, weak.velocity(vacuum_eps)[:, None])


def _trapezoid_running(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    increments = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    return np.concatenate(([0.0], np.cumsum(increments)))

#%% Localized relative energy

def localized_relative_energy(
        weak: Field,
        strong: StrongSolution1D,
        c: TransportedCutoff,
        g: GasParams,
        vacuum_eps: float = VACUUM_EPS) -> float:
    '''
    Midpoint-rule value of int phi(x, t) A(strong; weak) dx at t = weak.time.

    Raises
    ------
    DomainCoverageError
        supp phi(., t) is not contained in the grid.
    '''
    _check_coverage(c, weak)
    phi = cutoff_eval(c, weak.grid.centers, weak.time)
    if not np.any(phi > 0):
        return 0.0
    strong_state, weak_state = _state_pair(weak, strong, vacuum_eps)
    A = rel_energy_density_A(strong_state, weak_state, g)
    return float(np.sum(phi * A) * weak.grid.dx)


def relative_energy_series(
        weak: Trajectory,
        strong: StrongSolution1D,
        c: TransportedCutoff,
        g: GasParams) -> RelEnergySeries:
    values = np.array([localized_relative_energy(f, strong, c, g, weak.config.vacuum_eps) for f in weak])
    return RelEnergySeries(weak.times, values, c, g.gamma)


def matched_data_decay(series: RelEnergySeries, tol: float = MATCH_TOL) -> bool:
    '''
    Discrete decay check for matched data: E(0) <= tol and
    E(first later snapshot) <= E(t_end) + tol.
    '''
    values = np.asarray(series.values)
    if values[0] > tol:
        return False
    if values.size < 2:
        return True
    return bool(values[1] <= values[-1] + tol)

#%% Compressible Gronwall inequality

def _c1_norm(R: np.ndarray, U: np.ndarray, dx: float, mask: np.ndarray) -> float:
    if not np.any(mask):
        return 0.0
    norm = np.abs(U) + np.abs(np.gradient(U, dx)) + np.abs(R) + np.abs(np.gradient(R, dx))
    return float(np.max(norm[mask]))


def check_matched_data(weak: Field, strong: StrongSolution1D, c: TransportedCutoff, tol: float = MATCH_TOL,
                       vacuum_eps: float = VACUUM_EPS) -> float:
    '''
    Largest |rho - R| + |u - U| on supp phi(., t) at the time of weak.

    Raises
    ------
    HypothesisError
        The mismatch exceeds tol.
    '''
    phi = cutoff_eval(c, weak.grid.centers, weak.time)
    support = phi > 0
    if not np.any(support):
        return 0.0
    R, U = strong.evaluate(weak.grid.centers, weak.time)
    mismatch = np.abs(weak.rho - R) + np.abs(weak.velocity(vacuum_eps) - U)
    worst = float(np.max(mismatch[support]))
    if worst > tol:
        raise HypothesisError(
            f"Weak and strong data differ by {worst:.3g} > {tol:g} on the cutoff support at t={weak.time:.6g}."
        )
    return worst


def gronwall_evaluate(
        weak: Trajectory,
        strong: StrongSolution1D,
        c: TransportedCutoff,
        g: GasParams,
        factor: float = GRONWALL_FACTOR,
        match_tol: float = MATCH_TOL) -> GronwallReport:
    '''
    Evaluate both sides of the localized relative energy inequality along a run.

    Parameters
    ----------
    weak : Trajectory
        Weak (numerical) solution.
    strong : StrongSolution1D
        Strong solution, evaluable at the snapshot times.
    c : TransportedCutoff
        Cutoff; d_t phi and grad phi are analytic.
    g : GasParams
        Gas parameters.
    factor : float
        Factor of the Gronwall term.
    match_tol : float
        Tolerance of the matched initial data check.

    Raises
    ------
    HypothesisError
        Initial data differ on supp phi(., 0).
    DomainCoverageError
        The cutoff support leaves the grid.

    Returns
    -------
    GronwallReport

    '''
    eps = weak.config.vacuum_eps
    check_matched_data(weak[0], strong, c, match_tol, eps)

    lhs, flux, norm = [], [], []
    for f in weak:
        _check_coverage(c, f)
        x = f.grid.centers
        phi = cutoff_eval(c, x, f.time)
        strong_state, weak_state = _state_pair(f, strong, eps)
        A = rel_energy_density_A(strong_state, weak_state, g)
        B = rel_energy_flux_B(strong_state, weak_state, g)[:, 0]
        dt_phi = c.time_derivative(x, f.time)
        grad_phi = c.gradient(x, f.time)[:, 0]

        lhs.append(np.sum(phi * A) * f.grid.dx)
        flux.append(np.sum(dt_phi * A + grad_phi * B) * f.grid.dx)
        norm.append(_c1_norm(strong_state.rho, strong_state.vel[:, 0], f.grid.dx, phi > 0))

    times = weak.times
    lhs = np.array(lhs)
    norm = np.array(norm)
    flux_integral = _trapezoid_running(np.array(flux), times)
    gronwall_integral = _trapezoid_running(norm * lhs, times)
    rhs = lhs[0] + flux_integral + factor * gronwall_integral

    report = GronwallReport(times, lhs, rhs, norm, flux_integral, gronwall_integral, factor)
    logger.info(
        f"Gronwall check on {f.grid.n_cells} cells: max lhs {np.max(lhs):.3g}, "
        f"worst residual {report.worst_residual:.3g}, sufficient factor {report.sufficient_factor:.3g}."
    )
    return report

#%% Incompressible Gronwall inequality

def incompressible_gronwall(
        weakish: IncompressibleSolution2D,
        strong: IncompressibleSolution2D,
        c: TransportedCutoff,
        tau: float,
        quad_n: int,
        n_time: int = 101,
        match_tol: float = MATCH_TOL) -> Tuple[float, float]:
    '''
    Both sides of the localized energy inequality for incompressible Euler:
    lhs = 1/2 int phi |U - u|^2 at tau,
    rhs = lhs(0) + int_0^tau int [1/2 d_t phi |w|^2 + grad phi . (1/2 |w|^2 u + (P - p) w)]
          + 2 int_0^tau |grad_sym U|_Linf E.

    Parameters
    ----------
    weakish, strong : IncompressibleSolution2D
        Pair whose velocities coincide on supp phi(., 0).
    c : TransportedCutoff
        2-D cutoff.
    tau : float
        Final time.
    quad_n : int
        Midpoint nodes per axis over the bounding box of supp phi(., 0).
    n_time : int
        Trapezoid nodes in [0, tau].
    match_tol : float
        Tolerance on |U - u| over supp phi(., 0).

    Raises
    ------
    HypothesisError
        The velocities differ on supp phi(., 0).

    Returns
    -------
    tuple
        (lhs, rhs).

    '''
    if c.bump.dim != 2:
        raise ValueError(f"The incompressible check needs a 2-D cutoff, got dimension {c.bump.dim}.")
    if quad_n < 1 or n_time < 2:
        raise ValueError(f"Need quad_n >= 1 and n_time >= 2, got {quad_n} and {n_time}.")

    eta = c.bump.eta
    h = 2.0 * eta / quad_n
    offsets = -eta + (np.arange(quad_n) + 0.5) * h
    X, Y = np.meshgrid(c.bump.center[0] + offsets, c.bump.center[1] + offsets, indexing='ij')
    nodes = np.stack([X, Y], axis=-1)
    area = h * h

    U0, _ = incompressible_eval(strong, nodes, 0.0)
    u0, _ = incompressible_eval(weakish, nodes, 0.0)
    support = cutoff_eval(c, nodes, 0.0) > 0
    mismatch = np.linalg.norm(U0 - u0, axis=-1)
    if np.any(support) and np.max(mismatch[support]) > match_tol:
        raise HypothesisError(
            f"Velocities differ by {np.max(mismatch[support]):.3g} on the initial cutoff support."
        )

    times = np.linspace(0.0, tau, n_time)
    energy = np.empty(n_time)
    flux = np.empty(n_time)
    strain = np.empty(n_time)
    for k, t in enumerate(times):
        U, P = incompressible_eval(strong, nodes, t)
        u, p = incompressible_eval(weakish, nodes, t)
        w = U - u
        w2 = np.sum(w ** 2, axis=-1)
        phi = cutoff_eval(c, nodes, t)
        dt_phi = c.time_derivative(nodes, t)
        grad_phi = c.gradient(nodes, t)
        transport = 0.5 * w2[..., None] * u + (P - p)[..., None] * w

        energy[k] = 0.5 * np.sum(phi * w2) * area
        flux[k] = np.sum(0.5 * dt_phi * w2 + np.sum(grad_phi * transport, axis=-1)) * area
        G = velocity_gradient(strong, nodes, t)
        sym = 0.5 * (G + np.swapaxes(G, -1, -2))
        strain[k] = float(np.max(np.linalg.norm(sym, ord=2, axis=(-2, -1))))

    lhs = float(energy[-1])
    rhs = float(energy[0] + _trapezoid_running(flux, times)[-1]
                + 2.0 * _trapezoid_running(strain * energy, times)[-1])
    logger.info(f"Incompressible check ({strong.kind} vs {weakish.kind}) at tau={tau:g}: lhs {lhs:.3g}, rhs {rhs:.3g}.")
    return lhs, rhs

#%% Sign condition along a run

def sign_condition_sweep(
        weak: Trajectory,
        strong: StrongSolution1D,
        c: TransportedCutoff,
        g: GasParams,
        tol: float = SIGN_TOL) -> SignSweep:
    '''
    A d_t phi + B . grad phi over the cells inside supp phi of every snapshot,
    normalized by 1 + A. Violations count applicable nodes above tol; nodes
    with A <= A_FLOOR are counted as matched and take no part in the check.
    '''
    eps = weak.config.vacuum_eps
    worst = -np.inf
    violations = inapplicable = nodes = matched = 0
    for f in weak:
        x = f.grid.centers
        inside = cutoff_eval(c, x, f.time) > 0
        if not np.any(inside):
            continue
        strong_state, weak_state = _state_pair(f, strong, eps)
        A = rel_energy_density_A(strong_state, weak_state, g)[inside]
        B = rel_energy_flux_B(strong_state, weak_state, g)[inside, 0]
        check = sign_condition(A, B, c, x[inside], f.time)
        scaled = check.value / (1.0 + A)
        active = A > A_FLOOR
        applicable = check.applicable & active
        nodes += int(inside.sum())
        matched += int(np.count_nonzero(~active))
        inapplicable += int(np.count_nonzero(active & ~check.applicable))
        violations += int(np.count_nonzero(applicable & (scaled > tol)))
        if np.any(applicable):
            worst = max(worst, float(np.max(scaled[applicable])))
    if violations:
        logger.warning(f"Sign condition violated at {violations} of {nodes} nodes (max {worst:.3g}).")
    return SignSweep(worst if np.isfinite(worst) else 0.0, violations, inapplicable, nodes, matched)


def realized_box(weak: Trajectory, strong: Optional[StrongSolution1D], gamma: float) -> StateBox:
    ''' Smallest state box holding every weak state and the strong states at the weak cell centres '''
    eps = weak.config.vacuum_eps
    rho, speed = [], []
    for f in weak:
        rho.append(f.rho)
        speed.append(np.abs(f.velocity(eps)))
        if strong is not None:
            R, U = strong.evaluate(f.grid.centers, f.time)
            rho.append(R)
            speed.append(np.abs(U))
    return StateBox.realized(np.concatenate(rho), np.concatenate(speed), gamma)

#%% Support and propagation speed

def support_radius(f: Field, background: Tuple[float, float], threshold: float, center: float = 0.0) -> float:
    '''
    Largest |x_i - center| over cells with |rho - rho_bar| + |m - m_bar| > threshold,
    0 when no cell exceeds it.
    '''
    if not threshold > 0:
        raise ValueError(f"Support threshold must be > 0, got {threshold}.")
    rho_bar, vel_bar = background
    deviation = np.abs(f.rho - rho_bar) + np.abs(f.mom - rho_bar * vel_bar)
    perturbed = deviation > threshold
    if not np.any(perturbed):
        return 0.0
    return float(np.max(np.abs(f.grid.centers[perturbed] - center)))


def fit_speed(times: Sequence[float], radii: Sequence[float]) -> Tuple[float, float]:
    ''' Least-squares line radius = intercept + speed t '''
    times = np.asarray(times, dtype=float)
    radii = np.asarray(radii, dtype=float)
    if times.size < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"A speed fit needs at least {MIN_FIT_POINTS} snapshots, got {times.size}."
        )
    if np.ptp(radii) == 0:
        return 0.0, float(radii[0])
    fit = linregress(times, radii)
    return float(fit.slope), float(fit.intercept)


def support_radii(t: Trajectory, background: Tuple[float, float], threshold: float,
                  center: float = 0.0) -> np.ndarray:
    return np.array([support_radius(f, background, threshold, center) for f in t])


def propagation_speed(
        t: Trajectory,
        background: Tuple[float, float],
        threshold: float,
        center: float = 0.0) -> Tuple[float, float]:
    '''
    Speed and intercept of the support radius over the snapshot times.

    Snapshots without any perturbed cell are not usable.

    Raises
    ------
    InsufficientDataError
        Fewer than three usable snapshots.
    '''
    radii = support_radii(t, background, threshold, center)
    usable = radii > 0
    times = t.times[usable]
    radii = radii[usable]
    if np.any(np.diff(radii) < -t.grid.dx):
        logger.warning("Support radius shrinks by more than one cell between snapshots.")
    return fit_speed(times, radii)


def extrapolated_speed(
        spacings: Sequence[float],
        speeds: Sequence[float],
        order: float = SPEED_EXCESS_ORDER) -> Tuple[float, float]:
    '''
    Grid-independent front speed from speeds measured on several grids.

    A first-order scheme smears a front diffusively, so the measured speed
    exceeds the limit speed by an amount proportional to dx^order.

    Parameters
    ----------
    spacings : sequence of float
        Cell sizes of the runs.
    speeds : sequence of float
        Fitted support speeds of the same runs.
    order : float
        Exponent of dx in the speed excess.

    Raises
    ------
    InsufficientDataError
        Fewer than two runs or a repeated cell size.

    Returns
    -------
    tuple
        (limit speed, excess coefficient).

    '''
    spacings = np.asarray(spacings, dtype=float)
    speeds = np.asarray(speeds, dtype=float)
    if spacings.size != speeds.size or np.unique(spacings).size < 2:
        raise InsufficientDataError("Speed extrapolation needs at least two grids with distinct cell sizes.")
    if not order > 0:
        raise ValueError(f"order must be > 0, got {order}.")
    fit = linregress(spacings ** order, speeds)
    logger.debug(f"Extrapolated speed {fit.intercept:.5g} (excess coefficient {fit.slope:.4g}).")
    return float(fit.intercept), float(fit.slope)

#%% Admissibility and convergence

def admissibility_report(t: Trajectory) -> float:
    ''' Largest discrete energy production over all steps, over the largest cell energy '''
    if t.production_max.size == 0:
        return 0.0
    production = float(np.max(t.production_max))
    scale = float(np.max(t.energy_max))
    return production / scale if scale > 0 else production


def observed_order(errors: Sequence[float], resolutions: Sequence[float]) -> np.ndarray:
    ''' log(e_k / e_{k+1}) / log(n_{k+1} / n_k) for consecutive levels '''
    errors = np.asarray(errors, dtype=float)
    resolutions = np.asarray(resolutions, dtype=float)
    if errors.size != resolutions.size or errors.size < 2:
        raise InsufficientDataError("Observed orders need at least two matching levels.")
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.log(errors[:-1] / errors[1:]) / np.log(resolutions[1:] / resolutions[:-1])

#%% Relevant packages

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

#%% Custom packages

from .core.errors import DomainError, HypothesisError, UnsupportedRegimeError

logger = logging.getLogger(__name__)

#%% Constants

SAFETY_FACTOR = 1.05 # applied to the grid maximum of |B|/A
A_FLOOR = 1e-14 # points with A below this are left out of the ratio
BOX_PAD = 1e-9 # relative widening of degenerate realized boxes
V_FLOOR = 1e-12
IDENTIFY_ZERO_TOL = 1e-12 # A at or below this counts as zero
IDENTIFY_STATE_TOL = 1e-6 # largest difference of identified states
NEAR_OFFSETS = (0.0, 1e-9, 1e-3) # shifts of the nearby pairs; none between the two tolerances

ArrayLike = Union[float, np.ndarray]

#%% Domain types

@dataclass(frozen=True)
class GasParams:
    ''' Polytropic gas p = rho^gamma '''

    gamma: float

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 1:
            raise HypothesisError(f"gamma must be > 1, got {self.gamma}.")

    @property
    def kappa(self) -> float:
        ''' gamma / (gamma - 1), the enthalpy factor '''
        return self.gamma / (self.gamma - 1)


@dataclass(frozen=True)
class PrimitiveState:
    '''
    Density and velocity at one point or at a batch of points.

    Parameters
    ----------
    rho : float or np.ndarray
        Mass density, shape S.
    vel : sequence or np.ndarray
        Velocity with the space dimension on the last axis, shape S + (d,).
        A bare scalar is read as a 1-D velocity.
    '''

    rho: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        vel = np.asarray(self.vel, dtype=float)
        if vel.ndim == 0:
            vel = vel.reshape(1)
        try:
            np.broadcast_shapes(rho.shape, vel.shape[:-1])
        except ValueError as err:
            raise DomainError(
                f"Density shape {rho.shape} does not match velocity shape {vel.shape}."
            ) from err
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(vel))):
            raise DomainError("State components must be finite.")
        if np.any(rho < 0):
            raise DomainError("Density must be >= 0.")
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'vel', vel)

    @property
    def dim(self) -> int:
        return self.vel.shape[-1]

    @property
    def speed(self) -> np.ndarray:
        return np.linalg.norm(self.vel, axis=-1)


@dataclass(frozen=True)
class StateBox:
    '''
    Bounds r_lo <= rho <= r_hi and |u| <= v_max under which |B| <= C A holds.

    Raises
    ------
    HypothesisError
        Broken ordering of the bounds, non-positive v_max, or r_lo = 0 with
        gamma < 2.
    '''

    r_lo: float
    r_hi: float
    v_max: float
    gamma: float

    def __post_init__(self):
        GasParams(self.gamma)
        if not (0 <= self.r_lo < self.r_hi < np.inf):
            raise HypothesisError(
                f"State box needs 0 <= r_lo < r_hi < inf, got r_lo={self.r_lo}, r_hi={self.r_hi}."
            )
        if not (0 < self.v_max < np.inf):
            raise HypothesisError(f"State box needs v_max > 0, got {self.v_max}.")
        if self.gamma < 2 and self.r_lo <= 0:
            raise HypothesisError(
                f"gamma={self.gamma} < 2 requires r_lo > 0 (no vacuum in the box)."
            )

    @property
    def gas(self) -> GasParams:
        return GasParams(self.gamma)

    @classmethod
    def realized(cls, rho: np.ndarray, speed: np.ndarray, gamma: float) -> 'StateBox':
        ''' Smallest box holding the given densities and speeds '''
        rho = np.asarray(rho, dtype=float)
        speed = np.abs(np.asarray(speed, dtype=float))
        r_lo = float(np.min(rho))
        r_hi = float(np.max(rho))
        pad = BOX_PAD * max(1.0, abs(r_hi))
        if r_hi - r_lo < pad:
            r_hi = r_lo + pad
        v_max = max(float(np.max(speed)), V_FLOOR)
        return cls(r_lo, r_hi, v_max, gamma)

#%% Equation of state

def _check_density(*arrays: np.ndarray) -> None:
    for a in arrays:
        if np.any(np.asarray(a) < 0):
            raise DomainError("Density must be >= 0.")


def pressure(rho: ArrayLike, g: GasParams) -> ArrayLike:
    ''' p(rho) = rho^gamma '''
    rho = np.asarray(rho, dtype=float)
    _check_density(rho)
    return rho ** g.gamma


def sound_speed(rho: ArrayLike, g: GasParams) -> ArrayLike:
    ''' c(rho) = sqrt(gamma rho^(gamma-1)) '''
    rho = np.asarray(rho, dtype=float)
    _check_density(rho)
    return np.sqrt(g.gamma * rho ** (g.gamma - 1))

#%% Energy

def energy_density(s: PrimitiveState, g: GasParams) -> ArrayLike:
    ''' Kinetic plus internal energy, rho |u|^2 / 2 + rho^gamma / (gamma - 1) '''
    return 0.5 * s.rho * np.sum(s.vel ** 2, axis=-1) + s.rho ** g.gamma / (g.gamma - 1)


def energy_flux(s: PrimitiveState, g: GasParams) -> np.ndarray:
    ''' (rho |u|^2 / 2 + gamma rho^gamma / (gamma - 1)) u '''
    scale = 0.5 * s.rho * np.sum(s.vel ** 2, axis=-1) + g.kappa * s.rho ** g.gamma
    return scale[..., None] * s.vel

#%% Relative energy

def _potential(R: np.ndarray, rho: np.ndarray, gamma: float) -> np.ndarray:
    return R ** gamma - gamma / (gamma - 1) * rho * R ** (gamma - 1) + rho ** gamma / (gamma - 1)


def _flux_B(R, U, rho, u, gamma) -> np.ndarray:
    # velocities carry the space dimension on the last axis
    w2 = np.sum((u - U) ** 2, axis=-1)
    u_term = 0.5 * rho * w2 - gamma / (gamma - 1) * (R ** (gamma - 1) - rho ** (gamma - 1)) * rho
    return u_term[..., None] * u + (R ** gamma - rho ** gamma)[..., None] * U


def relative_potential(R: ArrayLike, rho: ArrayLike, g: GasParams) -> ArrayLike:
    '''
    Bregman divergence of r -> r^gamma / (gamma - 1) between rho and R.

    Parameters
    ----------
    R : float or np.ndarray
        Density of the strong state.
    rho : float or np.ndarray
        Density of the weak state.
    g : GasParams
        Gas parameters.

    Raises
    ------
    DomainError
        Negative density.

    Returns
    -------
    float or np.ndarray
        R^gamma - gamma/(gamma-1) rho R^(gamma-1) + rho^gamma/(gamma-1), >= 0.

    '''
    R = np.asarray(R, dtype=float)
    rho = np.asarray(rho, dtype=float)
    _check_density(R, rho)
    return _potential(R, rho, g.gamma)


def rel_energy_density_A(strong: PrimitiveState, weak: PrimitiveState, g: GasParams) -> ArrayLike:
    '''
    Relative energy density A(R, U; rho, u).

    Parameters
    ----------
    strong : PrimitiveState
        (R, U).
    weak : PrimitiveState
        (rho, u).
    g : GasParams
        Gas parameters.

    Returns
    -------
    float or np.ndarray
        rho |u - U|^2 / 2 plus the relative potential; zero only when the
        densities agree and either rho = 0 or u = U.

    '''
    kinetic = 0.5 * weak.rho * np.sum((weak.vel - strong.vel) ** 2, axis=-1)
    return kinetic + _potential(strong.rho, weak.rho, g.gamma)


def rel_energy_flux_B(strong: PrimitiveState, weak: PrimitiveState, g: GasParams) -> np.ndarray:
    '''
    Relative energy flux B(R, U; rho, u), a vector on the last axis:
    rho |u-U|^2 u / 2 - gamma/(gamma-1) (R^(gamma-1) - rho^(gamma-1)) rho u + (R^gamma - rho^gamma) U
    '''
    return _flux_B(strong.rho, strong.vel, weak.rho, weak.vel, g.gamma)

#%% Flux domination constant

def _grid_slice_max(rho: float, R: np.ndarray, u: np.ndarray, U: np.ndarray, gamma: float) -> float:
    ''' max |B|/A over one density slice of the search grid, collinear velocities '''
    R = R[:, None, None]
    u = u[None, :, None]
    U = U[None, None, :]
    kin = 0.5 * rho * (u - U) ** 2
    A = kin + _potential(R, rho, gamma)
    B = (kin - gamma / (gamma - 1) * (R ** (gamma - 1) - rho ** (gamma - 1)) * rho) * u \
        + (R ** gamma - rho ** gamma) * U
    keep = A > A_FLOOR
    if not np.any(keep):
        return 0.0
    return float(np.max(np.abs(B[keep]) / A[keep]))


def lemma_constant_grid(box: StateBox, dim: int = 1, grid_n: int = 64, workers: int = 1) -> float:
    '''
    Grid estimate of sup |B|/A over a state box, times the safety factor.

    Parameters
    ----------
    box : StateBox
        State bounds.
    dim : int
        Space dimension the velocities live in. The grid runs over collinear
        and anti-collinear pairs along one unit vector; for dim > 1 the
        maximum also covers grid_n**3 seeded random pairs in dim dimensions.
    grid_n : int
        Points per density axis and per velocity magnitude axis.
    workers : int
        Threads sharing the density axis; the maximum does not depend on it.

    Raises
    ------
    ValueError
        grid_n < 2 or dim < 1.

    Returns
    -------
    float
        1.05 times the largest grid ratio over points with A > 1e-14.

    '''
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}.")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}.")

    densities = np.linspace(box.r_lo, box.r_hi, grid_n)
    speeds = np.linspace(0.0, box.v_max, grid_n)
    # u runs over magnitudes along e, U over both orientations of e
    signed = np.concatenate([-speeds[:0:-1], speeds])

    def slice_max(rho: float) -> float:
        return _grid_slice_max(rho, densities, speeds, signed, box.gamma)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            maxima = list(pool.map(slice_max, densities))
    else:
        maxima = [slice_max(rho) for rho in densities]
    if dim > 1:
        maxima.append(_sampled_ratio_max(box, dim, grid_n ** 3, np.random.default_rng(0)))

    C = SAFETY_FACTOR * max(maxima)
    logger.debug(f"Grid constant {C:.6g} for {box} (grid_n={grid_n}, dim={dim}).")
    return C


def quadratic_bound_constant(box: StateBox) -> float:
    ''' c with relative_potential >= c (R - rho)^2 on a vacuum-free box '''
    if box.r_lo <= 0:
        raise UnsupportedRegimeError(
            "The quadratic lower bound needs r_lo > 0; use lemma_constant_grid for boxes with vacuum."
        )
    return 0.5 * box.gamma * min(box.r_lo ** (box.gamma - 2), box.r_hi ** (box.gamma - 2))


def lemma_constant_analytic(box: StateBox) -> float:
    '''
    Closed-form constant C = 2v + gamma/(gamma-1) max(1, r_hi K / (2c)),
    K = (gamma-1)^2 M^2, M = max(r_lo^(gamma-2), r_hi^(gamma-2)),
    c = gamma/2 min(r_lo^(gamma-2), r_hi^(gamma-2)).

    Raises
    ------
    UnsupportedRegimeError
        r_lo = 0; the grid constant is the only available value there.
    '''
    c = quadratic_bound_constant(box)
    g = box.gamma
    M = max(box.r_lo ** (g - 2), box.r_hi ** (g - 2))
    K = (g - 1) ** 2 * M ** 2
    return 2 * box.v_max + g / (g - 1) * max(1.0, box.r_hi * K / (2 * c))

#%% Sampling

def sample_states(
        box: StateBox,
        n: int,
        rng: np.random.Generator,
        dim: int = 1) -> Tuple[PrimitiveState, PrimitiveState]:
    '''
    Uniform (strong, weak) pairs inside a box. In one dimension the velocities
    are uniform on [-v, v]; otherwise directions are uniform on the sphere and
    magnitudes uniform on [0, v].
    '''
    R = rng.uniform(box.r_lo, box.r_hi, n)
    rho = rng.uniform(box.r_lo, box.r_hi, n)
    if dim == 1:
        U = rng.uniform(-box.v_max, box.v_max, (n, 1))
        u = rng.uniform(-box.v_max, box.v_max, (n, 1))
    else:
        U = _random_vectors(rng, n, dim, box.v_max)
        u = _random_vectors(rng, n, dim, box.v_max)
    return PrimitiveState(R, U), PrimitiveState(rho, u)


def _random_vectors(rng: np.random.Generator, n: int, dim: int, v_max: float) -> np.ndarray:
    directions = rng.normal(size=(n, dim))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return directions * rng.uniform(0.0, v_max, (n, 1))


def flux_domination_violations(
        box: StateBox,
        C: float,
        samples: int,
        rng: np.random.Generator,
        dim: int = 1,
        chunk: int = 250_000) -> int:
    ''' Number of sampled states with A > 1e-14 and |B| > C A '''
    g = box.gas
    violations = 0
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        strong, weak = sample_states(box, n, rng, dim)
        A = rel_energy_density_A(strong, weak, g)
        B = np.linalg.norm(rel_energy_flux_B(strong, weak, g), axis=-1)
        violations += int(np.count_nonzero((A > A_FLOOR) & (B > C * A)))
        remaining -= n
    return violations


def direction_check(
        box: StateBox,
        C: float,
        samples: int = 10_000,
        rng: Optional[np.random.Generator] = None,
        dim: int = 2) -> int:
    ''' Exceedances of a collinear-grid constant over random directions in dim > 1 '''
    rng = np.random.default_rng(0) if rng is None else rng
    return flux_domination_violations(box, C, samples, rng, dim=dim)


def _sampled_ratio_max(box: StateBox, dim: int, n: int, rng: np.random.Generator) -> float:
    ''' max |B|/A over n random pairs with A > 1e-14 '''
    g = box.gas
    strong, weak = sample_states(box, n, rng, dim)
    A = rel_energy_density_A(strong, weak, g)
    B = np.linalg.norm(rel_energy_flux_B(strong, weak, g), axis=-1)
    keep = A > A_FLOOR
    if not np.any(keep):
        return 0.0
    return float(np.max(B[keep] / A[keep]))

#%% Identification

def _nearby_pairs(box: StateBox, n: int, rng: np.random.Generator,
                  dim: int) -> Tuple[PrimitiveState, PrimitiveState]:
    ''' Strong states from the box, weak states shifted by one of NEAR_OFFSETS in density and velocity '''
    strong, _ = sample_states(box, n, rng, dim)
    offsets = rng.choice(NEAR_OFFSETS, n)
    if dim == 1:
        directions = rng.choice((-1.0, 1.0), (n, 1))
    else:
        directions = rng.normal(size=(n, dim))
        directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    weak = PrimitiveState(strong.rho + offsets, strong.vel + offsets[:, None] * directions)
    return strong, weak


def _vacuum_pairs(box: StateBox, n: int, rng: np.random.Generator,
                  dim: int) -> Tuple[PrimitiveState, PrimitiveState]:
    ''' Both sides vacuum, or one side vacuum against a density in [r_hi/2, r_hi] '''
    strong, weak = sample_states(box, n, rng, dim)
    dense = rng.uniform(0.5 * box.r_hi, box.r_hi, n)
    side = rng.integers(0, 3, n)
    R = np.where(side == 1, dense, 0.0)
    rho = np.where(side == 2, dense, 0.0)
    return PrimitiveState(R, strong.vel), PrimitiveState(rho, weak.vel)


def identification_violations(
        box: StateBox,
        samples: int,
        rng: np.random.Generator,
        dim: int = 1,
        zero_tol: float = IDENTIFY_ZERO_TOL,
        state_tol: float = IDENTIFY_STATE_TOL) -> int:
    '''
    Count sampled pairs where A vanishes although the states differ.

    A pair with A <= zero_tol must satisfy |rho - R| <= state_tol and either
    rho <= state_tol or |u - U| <= state_tol. The samples split into distinct
    pairs from the box, nearby pairs (offsets NEAR_OFFSETS in density and
    velocity) and, for boxes reaching vacuum, pairs with a vacuum side.

    Parameters
    ----------
    box : StateBox
        State bounds of the distinct and nearby pairs.
    samples : int
        Total number of pairs.
    rng : np.random.Generator
        Source of the samples.
    dim : int
        Space dimension of the velocities.
    zero_tol : float
        A at or below this counts as zero.
    state_tol : float
        Largest difference of identified states.

    Returns
    -------
    int
        Number of pairs breaking the implication.

    '''
    families = [sample_states, _nearby_pairs] + ([_vacuum_pairs] if box.r_lo <= 0 else [])
    per_family = max(samples // len(families), 1)
    g = box.gas
    violations = 0
    for draw in families:
        strong, weak = draw(box, per_family, rng, dim)
        A = rel_energy_density_A(strong, weak, g)
        close = np.abs(weak.rho - strong.rho) <= state_tol
        at_rest = (weak.rho <= state_tol) | (np.linalg.norm(weak.vel - strong.vel, axis=-1) <= state_tol)
        bad = (A <= zero_tol) & ~(close & at_rest)
        violations += int(np.count_nonzero(bad))
    logger.debug(f"Identification: {violations} violations over {per_family * len(families)} pairs in {box}.")
    return violations

#%% Relevant packages

import logging
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

#%% Custom packages

from .core.errors import UndefinedDirectionError

logger = logging.getLogger(__name__)

#%% Constants

SIGN_SLACK = 1e-9 # relative slack on |b| <= C a

ArrayLike = Union[float, np.ndarray]

#%% Hermite profile

def hermite_profile(s: ArrayLike, eta: float) -> ArrayLike:
    '''
    C^1 cubic smoothstep q: 1 on [0, eta/2], 0 on [eta, inf),
    q(s) = 1 - (3t^2 - 2t^3) with t = 2s/eta - 1 in between.
    '''
    t = np.clip(2.0 * np.asarray(s, dtype=float) / eta - 1.0, 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


def hermite_profile_derivative(s: ArrayLike, eta: float) -> ArrayLike:
    ''' q'(s); vanishes outside the transition band and at both of its ends '''
    t = np.clip(2.0 * np.asarray(s, dtype=float) / eta - 1.0, 0.0, 1.0)
    return -6.0 * t * (1.0 - t) * (2.0 / eta)

#%% Bump and transported cutoff

@dataclass(frozen=True)
class RadialBump:
    '''
    Radially symmetric, radially non-increasing C^1 bump phi0(x) = q(|x - x0|).

    Parameters
    ----------
    center : float or sequence
        Centre x0; its length fixes the space dimension.
    eta : float
        Support radius; phi0 = 1 on the ball of radius eta/2.
    '''

    center: np.ndarray
    eta: float

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=float))
        if center.ndim != 1:
            raise ValueError(f"Bump centre must be a point, got shape {center.shape}.")
        if not self.eta > 0:
            raise ValueError(f"Support radius eta must be > 0, got {self.eta}.")
        object.__setattr__(self, 'center', center)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def offset(self, x: ArrayLike) -> np.ndarray:
        ''' x - x0 with the space dimension on the last axis '''
        x = np.asarray(x, dtype=float)
        # in 1-D a plain array is a list of coordinates
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        return x - self.center

    def radius(self, x: ArrayLike) -> np.ndarray:
        return np.linalg.norm(self.offset(x), axis=-1)

    def profile(self, s: ArrayLike) -> ArrayLike:
        return hermite_profile(s, self.eta)

    def profile_derivative(self, s: ArrayLike) -> ArrayLike:
        return hermite_profile_derivative(s, self.eta)

    def mass_1d(self) -> float:
        ''' Integral of phi0 over the line, 1.5 eta '''
        return 1.5 * self.eta


@dataclass(frozen=True)
class TransportedCutoff:
    '''
    Shrinking cutoff phi(x, t) = q(|x - x0| + C t).

    It solves d_t phi - C (x - x0)/|x - x0| . grad phi = 0, equals 1 on
    B_{eta/4}(x0) for t < eta/(4C) and vanishes for t >= eta/C.
    '''

    bump: RadialBump
    speed: float

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"Cutoff speed must be > 0, got {self.speed}.")

    @property
    def lifetime(self) -> float:
        return self.bump.eta / self.speed

    def support_radius(self, t: float) -> float:
        return max(self.bump.eta - self.speed * t, 0.0)

    def argument(self, x: ArrayLike, t: ArrayLike) -> np.ndarray:
        return self.bump.radius(x) + self.speed * np.asarray(t, dtype=float)

    def time_derivative(self, x: ArrayLike, t: ArrayLike) -> np.ndarray:
        return self.speed * self.bump.profile_derivative(self.argument(x, t))

    def gradient(self, x: ArrayLike, t: ArrayLike) -> np.ndarray:
        '''
        Spatial gradient, space dimension on the last axis. At x = x0 the
        radial direction is undefined and the gradient is set to zero.
        '''
        offset = self.bump.offset(x)
        r = np.linalg.norm(offset, axis=-1)
        dq = self.bump.profile_derivative(r + self.speed * np.asarray(t, dtype=float))
        with np.errstate(divide='ignore', invalid='ignore'):
            unit = np.where(r[..., None] > 0, offset / r[..., None], 0.0)
        return dq[..., None] * unit

#%% Operations

def bump_eval(b: RadialBump, x: ArrayLike) -> ArrayLike:
    ''' phi0(x) = q(|x - x0|), in [0, 1] '''
    return b.profile(b.radius(x))


def cutoff_eval(c: TransportedCutoff, x: ArrayLike, t: ArrayLike) -> ArrayLike:
    ''' phi(x, t) = q(|x - x0| + C t) '''
    return c.bump.profile(c.argument(x, t))


def transport_residual(c: TransportedCutoff, x: ArrayLike, t: float, h: float) -> float:
    '''
    Centred finite-difference value of d_t phi - C (x - x0)/|x - x0| . grad phi.

    Parameters
    ----------
    c : TransportedCutoff
        The cutoff.
    x : float or sequence
        A single point.
    t : float
        Time.
    h : float
        Step for both the time and the space differences.

    Raises
    ------
    UndefinedDirectionError
        |x - x0| <= h, where the radial direction or the stencil degenerate.

    Returns
    -------
    float
        The residual, O(h^2) away from the ends of the transition band.

    '''
    offset = c.bump.offset(x).reshape(-1)
    r = float(np.linalg.norm(offset))
    if r <= h:
        raise UndefinedDirectionError(
            f"Transport residual needs |x - x0| > h; got |x - x0| = {r:.3g}, h = {h:.3g}."
        )
    point = c.bump.center + offset
    dt_phi = (cutoff_eval(c, point[None, :], t + h) - cutoff_eval(c, point[None, :], t - h))[0] / (2 * h)

    shifts = h * np.eye(c.bump.dim)
    grad = (cutoff_eval(c, point + shifts, t) - cutoff_eval(c, point - shifts, t)) / (2 * h)
    return float(dt_phi - c.speed * np.dot(offset / r, grad))


def transport_residual_max(c: TransportedCutoff, samples: int, h: float, rng: np.random.Generator) -> float:
    '''
    Largest |transport_residual| over random points of the smooth band
    interior at times in [h, eta/(4C)]: every stencil keeps |x - x0| + C t
    inside one cubic piece of the profile.

    Raises
    ------
    ValueError
        h too large for a stencil to fit inside the band.
    '''
    eta = c.bump.eta
    margin = (1.0 + c.speed) * h
    lo, hi = 0.5 * eta + margin, eta - margin
    t_max = 0.25 * eta / c.speed
    if not (lo < hi and h < t_max):
        raise ValueError(f"Step h={h:g} leaves no room inside the transition band of width {0.5 * eta:g}.")

    args = rng.uniform(lo, hi, samples)
    times = rng.uniform(h, t_max, samples)
    directions = rng.normal(size=(samples, c.bump.dim))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    points = c.bump.center + (args - c.speed * times)[:, None] * directions

    worst = max(abs(transport_residual(c, p, t, h)) for p, t in zip(points, times))
    logger.debug(f"Transport residual {worst:.3g} over {samples} samples at h={h:g}.")
    return worst


class SignCheck(NamedTuple):
    value: np.ndarray
    applicable: np.ndarray


def sign_condition(a: ArrayLike, b: ArrayLike, c: TransportedCutoff, x: ArrayLike, t: ArrayLike) -> SignCheck:
    '''
    a d_t phi + b . grad phi, with analytic derivatives.

    Parameters
    ----------
    a : float or np.ndarray
        Nonnegative weight of the time derivative, shape S.
    b : float or np.ndarray
        Weight of the gradient, shape S + (d,); a bare array is read as 1-D.
    c : TransportedCutoff
        The cutoff.
    x : float or np.ndarray
        Points, shape S + (d,) (or S in 1-D).
    t : float or np.ndarray
        Time(s).

    Returns
    -------
    SignCheck
        value and the applicability mask (a >= 0 and |b| <= C a). Where the
        mask holds, value <= 0 up to round-off.

    '''
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if c.bump.dim == 1 and (b.ndim == 0 or b.shape[-1] != 1):
        b = b[..., None]
    value = a * c.time_derivative(x, t) + np.sum(b * c.gradient(x, t), axis=-1)
    b_norm = np.linalg.norm(b, axis=-1)
    applicable = (a >= 0) & (b_norm <= c.speed * a * (1 + SIGN_SLACK))
    return SignCheck(value, applicable)

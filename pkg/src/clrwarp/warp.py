"""CLR transform between warping functions and zero-mean log-derivative fields."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .numerics import Grid, cumulative_trapezoid, trapezoid_integral

__all__ = ["WarpError", "WarpField", "clr_inverse", "clr_forward", "invert_warp", "identity_warp"]

RECENTER_TOL = 1e-6
# exp(-x) underflows to zero in double precision near x = 745
MAX_PSI_RANGE = 700.0


class WarpError(ValueError):
    """Raised when a sampled warp is not a valid diffeomorphism of [0, 1]."""


@dataclass(frozen=True, eq=False)
class WarpField:
    """A warp ``gamma`` sampled on a grid together with its CLR field.

    ``gamma_prime == exp(psi) / normalizer`` for warps built by
    :func:`clr_inverse`.
    """

    grid: Grid
    psi: np.ndarray
    gamma: np.ndarray
    gamma_prime: np.ndarray
    normalizer: float

    @property
    def min_gamma_prime(self):
        return float(self.gamma_prime.min())

    @property
    def max_gamma_prime(self):
        return float(self.gamma_prime.max())

    def is_diffeomorphism(self):
        """Endpoints exactly 0 and 1, strictly increasing, positive velocity."""
        g = self.gamma
        return bool(
            g[0] == 0.0
            and g[-1] == 1.0
            and np.all(np.diff(g) > 0)
            and np.all(self.gamma_prime > 0)
            and np.all(np.isfinite(self.gamma_prime))
        )

    @classmethod
    def from_samples(cls, grid, gamma, gamma_prime):
        """Wrap analytically sampled ``gamma`` and ``gamma'``, checking validity."""
        gamma = np.array(gamma, dtype=float)
        gamma_prime = np.array(gamma_prime, dtype=float)
        if np.any(gamma_prime <= 0) or not np.all(np.isfinite(gamma_prime)):
            raise WarpError("warp velocity must be finite and strictly positive")
        if abs(gamma[0]) > 1e-12 or abs(gamma[-1] - 1.0) > 1e-12:
            raise WarpError("warp endpoints must be 0 and 1")
        gamma[0], gamma[-1] = 0.0, 1.0
        if not np.all(np.diff(gamma) > 0):
            raise WarpError("warp must be strictly increasing")
        log_v = np.log(gamma_prime)
        mean = trapezoid_integral(log_v, grid)
        return cls(grid, log_v - mean, gamma, gamma_prime, float(np.exp(-mean)))


def identity_warp(grid):
    n = grid.n_points
    return WarpField(grid, np.zeros(n), grid.nodes.copy(), np.ones(n), 1.0)


def clr_inverse(psi, grid):
    """Normalized exponential map: the warp whose CLR field is ``psi``.

    A constant offset in ``psi`` does not change the warp; drift of the
    trapezoid mean beyond 1e-6 is removed before the field is stored.

    Raises
    ------
    WarpError
        If ``psi`` is not finite, or its range is so large that the smallest
        velocity underflows or the sampled warp stops increasing in floating
        point. The warp is never clipped or projected.
    """
    psi = np.array(psi, dtype=float)
    if psi.shape != (grid.n_points,):
        raise ValueError(f"expected psi of length {grid.n_points}, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise WarpError("psi contains non-finite values")
    mean = trapezoid_integral(psi, grid)
    if abs(mean) > RECENTER_TOL:
        psi = psi - mean
    shift = psi.max()
    if shift - psi.min() > MAX_PSI_RANGE:
        raise WarpError(
            f"psi range {shift - psi.min():.4g} exceeds {MAX_PSI_RANGE:g}: the velocity ratio "
            "is not representable in double precision"
        )
    e = np.exp(psi - shift)
    cum = cumulative_trapezoid(e, grid)
    total = cum[-1]
    gamma = cum / total
    gamma[-1] = 1.0
    if not np.all(np.diff(gamma) > 0):
        raise WarpError(
            "warp increments fall below double-precision resolution; psi is too extreme"
        )
    gamma_prime = e / total
    return WarpField(grid, psi, gamma, gamma_prime, float(total * np.exp(shift)))


def clr_forward(gamma_prime, grid):
    """CLR transform ``log(gamma') - mean(log(gamma'))`` of a sampled velocity."""
    v = np.asarray(gamma_prime, dtype=float)
    if v.shape != (grid.n_points,):
        raise ValueError(f"expected a velocity of length {grid.n_points}, got shape {v.shape}")
    if np.any(~(v > 0)):
        raise WarpError("CLR transform needs a strictly positive velocity")
    log_v = np.log(v)
    return log_v - trapezoid_integral(log_v, grid)


def invert_warp(field):
    """Sampled inverse warp.

    ``gamma^{-1}`` comes from monotone (PCHIP) interpolation of the swapped
    pairs ``(gamma, t)``; its velocity is ``1 / gamma'(gamma^{-1}(t))``.
    Composition error is about 1e-4 uniform or better on N=1000 grids.
    """
    grid = field.grid
    t = grid.nodes
    if not np.all(np.diff(field.gamma) > 0):
        raise WarpError("cannot invert a warp that is not strictly increasing")
    inv = PchipInterpolator(field.gamma, t)(t)
    inv[0], inv[-1] = 0.0, 1.0
    vel = CubicSpline(t, field.gamma_prime, bc_type="natural")(inv)
    floor = field.min_gamma_prime
    # spline overshoot must not create non-positive velocities
    vel = np.maximum(vel, 0.5 * floor)
    return WarpField.from_samples(grid, inv, 1.0 / vel)

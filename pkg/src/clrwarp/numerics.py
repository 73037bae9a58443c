"""Uniform grids, trapezoid quadrature and natural cubic spline interpolation."""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "Grid",
    "Interpolant",
    "trapezoid_weights",
    "trapezoid_integral",
    "cumulative_trapezoid",
    "reverse_cumulative",
    "build_interpolant",
]


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform grid of ``n_points`` nodes on [0, 1]."""

    n_points: int
    nodes: np.ndarray = field(init=False, repr=False)
    spacing: float = field(init=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n_points)
        if n != self.n_points or n < 2:
            raise ValueError(f"grid needs an integer n_points >= 2, got {self.n_points!r}")
        nodes = np.linspace(0.0, 1.0, n)
        nodes[0], nodes[-1] = 0.0, 1.0
        nodes.flags.writeable = False
        h = 1.0 / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = 0.5 * h
        w.flags.writeable = False
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "spacing", h)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.n_points

    def __eq__(self, other):
        return isinstance(other, Grid) and other.n_points == self.n_points

    def __hash__(self):
        return hash(("Grid", self.n_points))

    @classmethod
    def from_nodes(cls, nodes, rtol=1e-9):
        """Rebuild a grid from sampled abscissae, rejecting non-uniform spacing."""
        nodes = np.asarray(nodes, dtype=float)
        grid = cls(len(nodes))
        if not np.allclose(nodes, grid.nodes, rtol=0.0, atol=rtol):
            raise ValueError("nodes do not form a uniform grid on [0, 1]")
        return grid


def _check_length(values, grid):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.shape[0] != grid.n_points:
        raise ValueError(
            f"expected a series of length {grid.n_points}, got shape {values.shape}"
        )
    return values


def trapezoid_weights(grid):
    """Quadrature weights ``w`` with ``sum(w * v)`` equal to the trapezoid rule."""
    return grid.weights


def trapezoid_integral(values, grid):
    """Trapezoid-rule integral of grid samples over [0, 1]."""
    values = _check_length(values, grid)
    return float(np.dot(grid.weights, values))


def cumulative_trapezoid(values, grid):
    """Running trapezoid integral from 0 to each node; ``out[0] == 0``."""
    values = _check_length(values, grid)
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum(0.5 * grid.spacing * (values[1:] + values[:-1]), out=out[1:])
    return out


def reverse_cumulative(values, grid):
    """Trapezoid integral from each node to 1; ``out[-1] == 0``.

    Accumulated from the right so that ``out[0]`` is bit-identical to the
    left-to-right total only up to rounding; both agree to ~1e-16 relative.
    """
    values = _check_length(values, grid)
    seg = 0.5 * grid.spacing * (values[1:] + values[:-1])
    out = np.empty_like(values)
    out[-1] = 0.0
    out[:-1] = np.cumsum(seg[::-1])[::-1]
    return out


class Interpolant:
    """Natural cubic spline through ``(xs, ys)``.

    Outside ``[xs[0], xs[-1]]`` the end-interval cubics are continued.
    """

    def __init__(self, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("xs and ys must be 1-D arrays of equal length")
        if xs.size < 4:
            raise ValueError("cubic interpolation needs at least 4 samples")
        if not np.all(np.diff(xs) > 0):
            raise ValueError("xs must be strictly increasing")
        self.xs = xs
        self.natural = True
        self._spline = CubicSpline(xs, ys, bc_type="natural", extrapolate=True)
        self._deriv = self._spline.derivative(1)

    @property
    def coefficients(self):
        """Per-interval polynomial coefficients, shape (4, n_intervals)."""
        return self._spline.c

    def __call__(self, t):
        return self._spline(t)

    def evaluate(self, t):
        return self._spline(t)

    def derivative(self, t):
        return self._deriv(t)


def build_interpolant(xs, ys):
    """Natural cubic spline interpolant of samples ``ys`` at abscissae ``xs``."""
    return Interpolant(xs, ys)

"""The four data mismatch functionals and their adjoint-kernel gradients.

With ``r = f - g o gamma`` each functional is a trapezoid-rule integral of a
pointwise cost ``phi(gamma, gamma')``. Its derivative with respect to the CLR
field is ``gamma' (K - Kbar)`` where the kernel ``K`` is the reverse
cumulative integral of ``d phi / d gamma`` plus ``d phi / d gamma'``:

=============  =============================  ==============================
method         d phi / d gamma                d phi / d gamma'
=============  =============================  ==============================
standard       -2 r g'(gamma)                 0
symmetric      -r g'(gamma) (1 + gamma')      r^2 / 2
isometry       -2 q g'(gamma) sqrt(gamma')    -q g(gamma) / sqrt(gamma')
jacobian       -2 r g'(gamma) sqrt(gamma')    r^2 / (2 sqrt(gamma'))
=============  =============================  ==============================

where ``q = f - g(gamma) sqrt(gamma')``.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .numerics import Interpolant, build_interpolant, reverse_cumulative, trapezoid_integral

__all__ = [
    "MethodId",
    "AlignmentContext",
    "evaluate_mismatch",
    "kernel_forces",
    "adjoint_kernel",
    "discrete_adjoint_kernel",
    "frechet_gradient_field",
]


class MethodId(enum.IntEnum):
    STANDARD = 1
    SYMMETRIC = 2
    ISOMETRY = 3
    JACOBIAN = 4

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().upper()
            if key.isdigit():
                return cls(int(key))
            aliases = {"JACOBIANWEIGHTED": "JACOBIAN", "JACOBIAN_WEIGHTED": "JACOBIAN"}
            return cls[aliases.get(key, key)]
        return cls(int(value))

    @property
    def label(self):
        return {1: "Standard", 2: "Symmetric", 3: "Isometry", 4: "Jacobian-W"}[int(self)]


ALL_METHODS = tuple(MethodId)


@dataclass(frozen=True, eq=False)
class AlignmentContext:
    """Target ``f``, source ``g`` and the current warp, with cached ``g o gamma``."""

    f: np.ndarray
    g: np.ndarray
    g_interp: Interpolant
    warp: object
    residual: np.ndarray
    warped_g: np.ndarray
    warped_g_prime: np.ndarray

    @property
    def grid(self):
        return self.warp.grid

    @classmethod
    def build(cls, f, g, warp, g_interp=None):
        """Evaluate ``g`` and ``g'`` along ``warp`` and form the residual.

        ``f`` and ``g`` may be :class:`~clrwarp.signals.Signal` objects or raw
        arrays on the warp's grid. Pass ``g_interp`` to reuse a spline.
        """
        f = np.asarray(getattr(f, "values", f), dtype=float)
        g = np.asarray(getattr(g, "values", g), dtype=float)
        n = warp.grid.n_points
        if f.shape != (n,) or g.shape != (n,):
            raise ValueError(f"signals must have {n} samples to match the warp grid")
        if g_interp is None:
            g_interp = build_interpolant(warp.grid.nodes, g)
        wg = g_interp(warp.gamma)
        wgp = g_interp.derivative(warp.gamma)
        return cls(f, g, g_interp, warp, f - wg, wg, wgp)


def evaluate_mismatch(method, ctx):
    """Trapezoid-rule value of mismatch ``method`` in context ``ctx``."""
    method = MethodId.parse(method)
    r = ctx.residual
    v = ctx.warp.gamma_prime
    if method is MethodId.STANDARD:
        integrand = r * r
    elif method is MethodId.SYMMETRIC:
        integrand = r * r * 0.5 * (1.0 + v)
    elif method is MethodId.ISOMETRY:
        q = ctx.f - ctx.warped_g * np.sqrt(v)
        integrand = q * q
    else:
        integrand = r * r * np.sqrt(v)
    return trapezoid_integral(integrand, ctx.grid)


def kernel_forces(method, ctx):
    """Positional and Jacobian forces ``(d phi/d gamma, d phi/d gamma')``."""
    method = MethodId.parse(method)
    r = ctx.residual
    v = ctx.warp.gamma_prime
    gp = ctx.warped_g_prime
    if method is MethodId.STANDARD:
        return -2.0 * r * gp, np.zeros_like(r)
    if method is MethodId.SYMMETRIC:
        return -r * gp * (1.0 + v), 0.5 * r * r
    sv = np.sqrt(v)
    if method is MethodId.ISOMETRY:
        q = ctx.f - ctx.warped_g * sv
        return -2.0 * q * gp * sv, -q * ctx.warped_g / sv
    return -2.0 * r * gp * sv, r * r / (2.0 * sv)


def adjoint_kernel(method, ctx):
    """Adjoint kernel ``K(t) = int_t^1 m_pos + m_jac(t)`` on the grid."""
    m_pos, m_jac = kernel_forces(method, ctx)
    return reverse_cumulative(m_pos, ctx.grid) + m_jac


def discrete_adjoint_kernel(method, ctx):
    """Kernel whose gradient field is the exact derivative of the discrete mismatch.

    Transposing the cumulative trapezoid rule that builds ``gamma`` from
    ``gamma'`` gives the trapezoid reverse integral at interior nodes but
    shifts the two end nodes by ``-h/2 m_pos[0]`` and ``+h/2 m_pos[-1]``.
    The difference from :func:`adjoint_kernel` is O(h) at two points and
    vanishes as the grid is refined.
    """
    m_pos, m_jac = kernel_forces(method, ctx)
    k = reverse_cumulative(m_pos, ctx.grid) + m_jac
    half_h = 0.5 * ctx.grid.spacing
    k[0] -= half_h * m_pos[0]
    k[-1] += half_h * m_pos[-1]
    return k


def frechet_gradient_field(kernel, warp, grid=None):
    """Gradient field ``gamma' (K - int K gamma')`` of a mismatch w.r.t. psi."""
    grid = grid or warp.grid
    kernel = np.asarray(kernel, dtype=float)
    if kernel.shape != (grid.n_points,):
        raise ValueError(f"kernel must have {grid.n_points} samples, got shape {kernel.shape}")
    v = warp.gamma_prime
    kbar = trapezoid_integral(kernel * v, grid)
    return v * (kernel - kbar)

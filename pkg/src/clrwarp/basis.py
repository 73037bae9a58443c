"""Centered cubic B-spline subspace and its Sobolev stiffness matrix."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from .numerics import Grid

__all__ = [
    "BasisSystem",
    "build_centered_basis",
    "clamped_knots",
    "uniform_knots",
    "raw_spline_matrices",
    "stiffness_matrix",
    "evaluate_psi",
    "sobolev_penalty",
]

DEGREE = 3
GRAM_EIG_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class BasisSystem:
    """Precomputed evaluation matrices for a d-dimensional zero-mean basis.

    Attributes
    ----------
    dim : int
        Number of retained basis functions ``d``.
    grid : Grid
        Quadrature grid the matrices are sampled on.
    eval_matrix, d1_matrix, d2_matrix : ndarray, shape (N, d)
        Centered basis values and their first and second derivatives.
    stiffness : ndarray, shape (d, d)
        ``R[i, j] = int phi_i' phi_j' + int phi_i'' phi_j''``.
    knots : ndarray
        Knot vector of the underlying B-splines.
    means : ndarray, shape (d,)
        Constants subtracted from the raw splines.
    """

    dim: int
    grid: Grid
    eval_matrix: np.ndarray
    d1_matrix: np.ndarray
    d2_matrix: np.ndarray
    stiffness: np.ndarray
    knots: np.ndarray
    means: np.ndarray

    @property
    def weighted_eval_matrix(self):
        # W B, used to project grid fields onto coefficient space
        return self.grid.weights[:, None] * self.eval_matrix


def clamped_knots(n_splines):
    """Clamped (4-fold end) uniform knot vector carrying ``n_splines`` cubic B-splines."""
    n_interior = n_splines - DEGREE - 1
    if n_interior < 0:
        raise ValueError("need at least 4 cubic B-splines")
    inner = np.linspace(0.0, 1.0, n_interior + 2)
    return np.concatenate([np.zeros(DEGREE), inner, np.ones(DEGREE)])


def uniform_knots(n_splines):
    """Equally spaced knots extending three spans past each end of [0, 1].

    All ``n_splines`` cubic B-splines are translates of one another and sum
    to one on [0, 1].
    """
    n_spans = n_splines - DEGREE
    if n_spans < 1:
        raise ValueError("need at least 4 cubic B-splines")
    return np.arange(-DEGREE, n_spans + DEGREE + 1) / n_spans


KNOT_LAYOUTS = {"uniform": uniform_knots, "clamped": clamped_knots}


def raw_spline_matrices(knots, x, nu=0):
    """Evaluate every B-spline (or its ``nu``-th derivative) at ``x``.

    Returns an array of shape (len(x), n_splines).
    """
    n = len(knots) - DEGREE - 1
    spl = BSpline(knots, np.eye(n), DEGREE, extrapolate=True)
    if nu:
        spl = spl.derivative(nu)
    return spl(np.asarray(x, dtype=float))


def _gauss_legendre_gram(knots, n_splines, nu, n_nodes=3):
    """Exact Gram matrix over [0, 1] of the ``nu``-th spline derivatives."""
    breaks = np.unique(np.clip(knots, 0.0, 1.0))
    xg, wg = np.polynomial.legendre.leggauss(n_nodes)
    a, b = breaks[:-1], breaks[1:]
    half = 0.5 * (b - a)
    pts = (0.5 * (a + b))[:, None] + half[:, None] * xg[None, :]
    wts = half[:, None] * wg[None, :]
    vals = raw_spline_matrices(knots, pts.ravel(), nu=nu)[:, :n_splines]
    return vals.T @ (wts.ravel()[:, None] * vals)


def stiffness_matrix(basis_or_knots, dim=None):
    """Sobolev stiffness matrix of the retained basis.

    Centering removes constants only, so the entries come from the raw spline
    derivatives. Integrands are piecewise polynomials of degree <= 4, which
    3-point Gauss-Legendre per knot span integrates exactly.
    """
    if isinstance(basis_or_knots, BasisSystem):
        return basis_or_knots.stiffness
    knots = np.asarray(basis_or_knots, dtype=float)
    r = _gauss_legendre_gram(knots, dim, 1) + _gauss_legendre_gram(knots, dim, 2)
    return 0.5 * (r + r.T)


def build_centered_basis(d, grid, knots="uniform"):
    """Build the d-dimensional centered cubic B-spline basis on ``grid``.

    ``d + 1`` cubic B-splines are generated, each is centered by its
    trapezoid mean on the grid, and the last one is dropped: the raw splines
    sum to one, so the full centered family is linearly dependent.

    Parameters
    ----------
    d : int
        Basis dimension, at least 4.
    grid : Grid
    knots : {"uniform", "clamped"}
        ``"uniform"`` (default) extends equally spaced knots past both ends of
        [0, 1]; every spline then has the same shape. ``"clamped"`` repeats
        the end knots four times, which produces boundary splines with much
        larger derivatives and a stiffness matrix roughly 7x stiffer.
    """
    d = int(d)
    if d < 4:
        raise ValueError(f"basis dimension must be >= 4, got {d}")
    knots = KNOT_LAYOUTS[knots](d + 1)
    x = grid.nodes
    raw = raw_spline_matrices(knots, x)
    means = grid.weights @ raw
    eval_full = raw - means[None, :]
    b = eval_full[:, :d]
    d1 = raw_spline_matrices(knots, x, nu=1)[:, :d]
    d2 = raw_spline_matrices(knots, x, nu=2)[:, :d]

    gram = b.T @ (grid.weights[:, None] * b)
    eig_min = np.linalg.eigvalsh(gram)[0]
    if eig_min <= GRAM_EIG_FLOOR:
        raise ValueError(
            f"centered basis is rank deficient on this grid (min Gram eigenvalue {eig_min:.3e});"
            " use a finer grid or fewer basis functions"
        )
    r = stiffness_matrix(knots, d)
    for arr in (b, d1, d2, r, knots, means):
        arr.flags.writeable = False
    return BasisSystem(
        dim=d, grid=grid, eval_matrix=b, d1_matrix=d1, d2_matrix=d2,
        stiffness=r, knots=knots, means=means[:d],
    )


def _check_coeffs(basis, coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.dim,):
        raise ValueError(f"expected {basis.dim} coefficients, got shape {c.shape}")
    return c


def evaluate_psi(basis, coeffs):
    """Return ``(psi, psi', psi'')`` on the grid for coefficient vector ``coeffs``."""
    c = _check_coeffs(basis, coeffs)
    return basis.eval_matrix @ c, basis.d1_matrix @ c, basis.d2_matrix @ c


def sobolev_penalty(basis, coeffs):
    """Squared Sobolev norm ``c^T R c`` of the field with coefficients ``coeffs``."""
    c = _check_coeffs(basis, coeffs)
    return float(c @ basis.stiffness @ c)

"""Finite-basis Sobolev registration by fixed-step gradient descent."""

import functools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .basis import build_centered_basis
from .mismatch import (
    AlignmentContext,
    MethodId,
    discrete_adjoint_kernel,
    evaluate_mismatch,
    frechet_gradient_field,
)
from .numerics import Grid, build_interpolant
from .warp import WarpError, WarpField, clr_inverse, invert_warp

__all__ = [
    "RegistrationConfig",
    "RegistrationResult",
    "DivergenceError",
    "cached_basis",
    "objective",
    "gradient",
    "register",
    "asymmetry_probe",
]

log = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0
# Gradients below this (max-abs) are roundoff; the iterate is stationary.
STATIONARY_GRAD = 1e-13


class DivergenceError(RuntimeError):
    """The objective grew past the divergence guard; the step size is too large."""

    def __init__(self, step_size, iteration, value, initial):
        self.step_size = step_size
        self.iteration = iteration
        super().__init__(
            f"objective diverged at iteration {iteration} ({value:.6g} > "
            f"{DIVERGENCE_FACTOR:g} x initial {initial:.6g}); reduce step size alpha={step_size:g}"
        )


@dataclass(frozen=True)
class RegistrationConfig:
    method: MethodId = MethodId.STANDARD
    basis_dim: int = 20
    grid_size: int = 1000
    lam: float = 1e-5
    step_size: float = 0.05
    max_iters: int = 4000
    rel_tol: float = 0.0
    init_coeffs: Optional[tuple] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", MethodId.parse(self.method))
        if self.basis_dim < 4:
            raise ValueError("basis_dim must be >= 4")
        if self.grid_size < 10 * self.basis_dim:
            raise ValueError("grid_size must be at least 10 x basis_dim")
        if self.lam < 0:
            raise ValueError("lam (Sobolev weight) must be non-negative")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be non-negative")
        if self.init_coeffs is not None:
            c = tuple(float(x) for x in self.init_coeffs)
            if len(c) != self.basis_dim:
                raise ValueError("init_coeffs must have basis_dim entries")
            object.__setattr__(self, "init_coeffs", c)

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return {
            "method": int(self.method),
            "d": self.basis_dim,
            "N": self.grid_size,
            "lambda": self.lam,
            "alpha": self.step_size,
            "max_iters": self.max_iters,
            "rel_tol": self.rel_tol,
            "seed": self.seed,
        }


@dataclass
class RegistrationResult:
    coeffs: np.ndarray
    warp: WarpField
    aligned: np.ndarray
    objective_trace: np.ndarray
    mismatch_trace: np.ndarray
    penalty_trace: np.ndarray
    final_mismatch: float
    final_penalty: float
    iterations_run: int
    converged: bool
    config: RegistrationConfig = field(repr=False, default=None)
    initial_objective: float = float("nan")

    @property
    def final_objective(self):
        return self.final_mismatch + self.config.lam * self.final_penalty


@functools.lru_cache(maxsize=32)
def cached_basis(d, n_points):
    """Basis for ``(d, N)``, built once and shared (it is immutable)."""
    return build_centered_basis(d, Grid(n_points))


def _values(x, n):
    v = np.asarray(getattr(x, "values", x), dtype=float)
    if v.shape != (n,):
        raise ValueError(f"signal must have {n} samples, got shape {v.shape}")
    return v


class _Problem:
    """Objective and gradient at a coefficient vector, sharing one pass."""

    def __init__(self, config, basis, f, g, kernel=None):
        self.config = config
        self.kernel = kernel or discrete_adjoint_kernel
        self.basis = basis
        self.grid = basis.grid
        n = self.grid.n_points
        self.f = _values(f, n)
        self.g = _values(g, n)
        self.g_interp = build_interpolant(self.grid.nodes, self.g)
        self.wb_t = np.ascontiguousarray(basis.weighted_eval_matrix.T)

    def _check(self, c):
        c = np.asarray(c, dtype=float)
        if c.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} coefficients, got shape {c.shape}")
        return c

    def context(self, c):
        psi = self.basis.eval_matrix @ c
        warp = clr_inverse(psi, self.grid)
        return AlignmentContext.build(self.f, self.g, warp, self.g_interp)

    def evaluate(self, c, with_grad=True):
        c = self._check(c)
        method = self.config.method
        ctx = self.context(c)
        mis = evaluate_mismatch(method, ctx)
        rc = self.basis.stiffness @ c
        pen = float(c @ rc)
        if not with_grad:
            return mis, pen, None, ctx
        kern = self.kernel(method, ctx)
        field_ = frechet_gradient_field(kern, ctx.warp, self.grid)
        grad = self.wb_t @ field_ + 2.0 * self.config.lam * rc
        return mis, pen, grad, ctx


def objective(config, basis, f, g, coeffs):
    """``J(c) = D(psi_c) + lam * c^T R c``."""
    mis, pen, _, _ = _Problem(config, basis, f, g).evaluate(coeffs, with_grad=False)
    return mis + config.lam * pen


def gradient(config, basis, f, g, coeffs, kernel=None):
    """Exact gradient of the discrete objective: ``B^T W G + 2 lam R c``.

    ``kernel`` replaces the adjoint kernel function; it exists so that
    verification code can inject a deliberately wrong one.
    """
    _, _, grad, _ = _Problem(config, basis, f, g, kernel).evaluate(coeffs)
    return grad


def register(f, g, config, basis=None, callback=None):
    """Align source ``g`` to target ``f`` by gradient descent on the coefficients.

    Parameters
    ----------
    f, g : Signal or ndarray
        Target and source sampled on the same ``config.grid_size`` grid.
    config : RegistrationConfig
    basis : BasisSystem, optional
        Reuse a prebuilt basis; defaults to the cached one for ``(d, N)``.
    callback : callable, optional
        Called as ``callback(k, coeffs, objective)`` after each step.

    Returns
    -------
    RegistrationResult

    Raises
    ------
    DivergenceError
        If the objective exceeds ten times its initial value.
    """
    if config.lam == 0:
        log.warning("lam=0: the objective is not coercive and minimizers need not exist")
    basis = basis or cached_basis(config.basis_dim, config.grid_size)
    if basis.dim != config.basis_dim or basis.grid.n_points != config.grid_size:
        raise ValueError("basis does not match config (basis_dim, grid_size)")
    prob = _Problem(config, basis, f, g)
    c = np.zeros(basis.dim) if config.init_coeffs is None else np.array(config.init_coeffs)
    alpha = config.step_size
    lam = config.lam

    mis, pen, grad, ctx = prob.evaluate(c)
    j0 = j_prev = mis + lam * pen
    guard = DIVERGENCE_FACTOR * max(j0, 1e-300)
    n_iter = config.max_iters
    obj = np.empty(n_iter)
    mis_tr = np.empty(n_iter)
    pen_tr = np.empty(n_iter)
    converged = False
    k = 0
    if np.max(np.abs(grad)) <= STATIONARY_GRAD:
        converged = True
    else:
        for k in range(n_iter):
            c = c - alpha * grad
            try:
                mis, pen, grad, ctx = prob.evaluate(c)
            except WarpError as exc:
                raise DivergenceError(alpha, k + 1, float("inf"), j0) from exc
            j = mis + lam * pen
            obj[k], mis_tr[k], pen_tr[k] = j, mis, pen
            if not np.isfinite(j) or j > guard:
                raise DivergenceError(alpha, k + 1, j, j0)
            if callback is not None:
                callback(k, c, j)
            stalled = abs(j - j_prev) / max(j_prev, 1e-12) < config.rel_tol
            if stalled or np.max(np.abs(grad)) <= STATIONARY_GRAD:
                converged = True
                k += 1
                break
            j_prev = j
        else:
            k = n_iter
    warp = ctx.warp
    return RegistrationResult(
        coeffs=c,
        warp=warp,
        aligned=ctx.warped_g,
        objective_trace=obj[:k].copy(),
        mismatch_trace=mis_tr[:k].copy(),
        penalty_trace=pen_tr[:k].copy(),
        final_mismatch=mis,
        final_penalty=pen,
        iterations_run=k,
        converged=converged,
        config=config,
        initial_objective=j0,
    )


def asymmetry_probe(f, g, config, basis=None, result=None):
    """Forward mismatch versus the swapped problem under the inverse warp.

    Returns ``(D(f, g, gamma_hat), D(g, f, gamma_hat^{-1}))``.
    """
    if result is None:
        result = register(f, g, config, basis=basis)
    grid = result.warp.grid
    fv = _values(f, grid.n_points)
    gv = _values(g, grid.n_points)
    forward = evaluate_mismatch(config.method, AlignmentContext.build(fv, gv, result.warp))
    inv = invert_warp(result.warp)
    swapped = evaluate_mismatch(config.method, AlignmentContext.build(gv, fv, inv))
    return forward, swapped

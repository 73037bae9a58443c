"""Finite-difference verification of the analytic coefficient gradient."""

from dataclasses import dataclass

import numpy as np

from .basis import build_centered_basis
from .mismatch import ALL_METHODS, MethodId, discrete_adjoint_kernel
from .numerics import Grid
from .optimizer import RegistrationConfig, gradient, objective
from .signals import gaussian_mixture

__all__ = ["GradientCheck", "random_instance", "central_differences", "gradient_check", "corrupted_kernel"]

FD_STEP = 1e-6
TOLERANCE = 1e-4


@dataclass(frozen=True)
class GradientCheck:
    method: MethodId
    trial: int
    max_rel_error: float
    worst_component: int

    @property
    def passed(self):
        return self.max_rel_error < TOLERANCE


def random_instance(rng, grid, d):
    """Smooth random ``(f, g, c)``: two 3-bump mixtures and moderate coefficients."""

    def mixture():
        amps = rng.uniform(0.5, 1.5, 3)
        centers = rng.uniform(0.15, 0.85, 3)
        widths = rng.uniform(0.05, 0.15, 3)
        return gaussian_mixture(amps, centers, widths, grid).values

    return mixture(), mixture(), rng.normal(0.0, 0.3, d)


def central_differences(fun, c, step=FD_STEP):
    c = np.asarray(c, dtype=float)
    out = np.empty_like(c)
    for j in range(c.size):
        e = np.zeros_like(c)
        e[j] = step
        out[j] = (fun(c + e) - fun(c - e)) / (2.0 * step)
    return out


def relative_error(analytic, reference):
    """``max|a - r| / max|r|`` with the index of the worst component.

    Normalizing by the largest reference component keeps near-zero entries
    from inflating the error.
    """
    diff = np.abs(np.asarray(analytic) - np.asarray(reference))
    scale = max(float(np.max(np.abs(reference))), 1e-12)
    return float(diff.max() / scale), int(diff.argmax())


def corrupted_kernel(method, ctx):
    """Negative control: the true kernel scaled by 1.5."""
    return 1.5 * discrete_adjoint_kernel(method, ctx)


def gradient_check(methods=ALL_METHODS, d=10, n_points=400, trials=20, seed=0, lam=1e-5,
                   kernel=None):
    """Compare the analytic gradient with central differences on random instances.

    Returns one :class:`GradientCheck` per (method, trial). The same random
    instances are used for every method.
    """
    grid = Grid(n_points)
    basis = build_centered_basis(d, grid)
    rng = np.random.Generator(np.random.PCG64(seed))
    instances = [random_instance(rng, grid, d) for _ in range(trials)]
    results = []
    for m in methods:
        cfg = RegistrationConfig(method=m, basis_dim=d, grid_size=n_points, lam=lam)
        for i, (f, g, c) in enumerate(instances):
            ana = gradient(cfg, basis, f, g, c, kernel=kernel)
            fd = central_differences(lambda x: objective(cfg, basis, f, g, x), c)
            err, worst = relative_error(ana, fd)
            results.append(GradientCheck(cfg.method, i, err, worst))
    return results

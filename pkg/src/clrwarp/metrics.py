"""Warp recovery errors in CLR space."""

from dataclasses import asdict, dataclass

import numpy as np

from .basis import evaluate_psi
from .numerics import trapezoid_integral

__all__ = ["RecoveryReport", "clr_l2_distance", "hnorm_distance", "recovery_report"]


@dataclass(frozen=True)
class RecoveryReport:
    clr_l2: float
    hnorm: float
    min_gamma_prime: float
    max_gamma_prime: float
    sup_warp_error: float

    def to_dict(self):
        return asdict(self)


def _pair(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return a, b


def clr_l2_distance(psi_a, psi_b, grid):
    """L2 distance between two CLR fields."""
    a, b = _pair(psi_a, psi_b)
    diff = a - b
    return float(np.sqrt(max(trapezoid_integral(diff * diff, grid), 0.0)))


def hnorm_distance(a, b, grid):
    """Sobolev distance ``sqrt(int (d psi')^2 + int (d psi'')^2)``.

    ``a`` and ``b`` are ``(psi, psi', psi'')`` triples; only the derivatives
    enter the norm.
    """
    if len(a) != 3 or len(b) != 3:
        raise ValueError("expected (psi, psi', psi'') triples")
    for x, y in zip(a, b):
        _pair(x, y)
    d1 = np.asarray(a[1], float) - np.asarray(b[1], float)
    d2 = np.asarray(a[2], float) - np.asarray(b[2], float)
    total = trapezoid_integral(d1 * d1, grid) + trapezoid_integral(d2 * d2, grid)
    return float(np.sqrt(max(total, 0.0)))


def recovery_report(result, truth, basis):
    """Distances between an estimated warp and the ground truth."""
    grid = basis.grid
    est = evaluate_psi(basis, result.coeffs)
    ref = (truth.psi0, truth.psi0_d1, truth.psi0_d2)
    warp = result.warp
    return RecoveryReport(
        clr_l2=clr_l2_distance(warp.psi, truth.psi0, grid),
        hnorm=hnorm_distance(est, ref, grid),
        min_gamma_prime=warp.min_gamma_prime,
        max_gamma_prime=warp.max_gamma_prime,
        sup_warp_error=float(np.max(np.abs(warp.gamma - truth.warp.gamma))),
    )

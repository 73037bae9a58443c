"""Sobolev-regularized pairwise registration of 1-D functional data."""

from .basis import BasisSystem, build_centered_basis, evaluate_psi, sobolev_penalty
from .metrics import RecoveryReport, clr_l2_distance, hnorm_distance, recovery_report
from .mismatch import ALL_METHODS, AlignmentContext, MethodId, adjoint_kernel, evaluate_mismatch
from .numerics import Grid
from .optimizer import (
    DivergenceError,
    RegistrationConfig,
    RegistrationResult,
    asymmetry_probe,
    gradient,
    objective,
    register,
)
from .signals import GroundTruth, Signal, add_noise, make_toy_pair, noisy_pair
from .warp import WarpError, WarpField, clr_forward, clr_inverse, invert_warp

__version__ = "0.1.0"

__all__ = [
    "ALL_METHODS",
    "AlignmentContext",
    "BasisSystem",
    "DivergenceError",
    "Grid",
    "GroundTruth",
    "MethodId",
    "RecoveryReport",
    "RegistrationConfig",
    "RegistrationResult",
    "Signal",
    "WarpError",
    "WarpField",
    "add_noise",
    "adjoint_kernel",
    "asymmetry_probe",
    "build_centered_basis",
    "clr_forward",
    "clr_inverse",
    "clr_l2_distance",
    "evaluate_mismatch",
    "evaluate_psi",
    "gradient",
    "hnorm_distance",
    "invert_warp",
    "make_toy_pair",
    "noisy_pair",
    "objective",
    "recovery_report",
    "register",
    "sobolev_penalty",
]

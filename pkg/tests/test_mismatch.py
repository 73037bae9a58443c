import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, strategies as st

from clrwarp.basis import build_centered_basis
from clrwarp.mismatch import (
    ALL_METHODS,
    AlignmentContext,
    MethodId,
    adjoint_kernel,
    discrete_adjoint_kernel,
    evaluate_mismatch,
    frechet_gradient_field,
    kernel_forces,
)
from clrwarp.numerics import Grid, trapezoid_integral
from clrwarp.signals import make_toy_pair
from clrwarp.warp import clr_inverse, identity_warp, invert_warp

from conftest import smooth_pair

GRID = Grid(1000)
BASIS = build_centered_basis(10, GRID)
seeds = st.integers(0, 2**32 - 1)


def random_warp(rng, scale=0.4):
    return clr_inverse(BASIS.eval_matrix @ rng.normal(0, scale, BASIS.dim), GRID)


def test_method_parsing():
    assert MethodId.parse(3) is MethodId.ISOMETRY
    assert MethodId.parse("4") is MethodId.JACOBIAN
    assert MethodId.parse("symmetric") is MethodId.SYMMETRIC
    assert MethodId.parse("jacobian_weighted") is MethodId.JACOBIAN
    with pytest.raises(ValueError):
        MethodId.parse(7)
    with pytest.raises(KeyError):
        MethodId.parse("elastic")


@pytest.mark.parametrize("method", ALL_METHODS)
def test_self_alignment_zero(method, rng):
    f, _ = smooth_pair(rng, GRID)
    ctx = AlignmentContext.build(f, f, identity_warp(GRID))
    assert evaluate_mismatch(method, ctx) < 1e-12
    field = frechet_gradient_field(adjoint_kernel(method, ctx), ctx.warp)
    assert np.abs(field).max() < 1e-8
    assert np.abs(adjoint_kernel(method, ctx)).max() < 1e-8


@pytest.mark.parametrize("method", [MethodId.STANDARD, MethodId.SYMMETRIC])
def test_triangle_identity_value(method):
    f, g, _ = make_toy_pair("triangle_2to1", GRID)
    ctx = AlignmentContext.build(f, g, identity_warp(GRID))
    assert evaluate_mismatch(method, ctx) == pytest.approx(1 / 3, abs=1e-3)


def test_isometry_is_biased_for_pure_warps():
    # For a pure reparameterization f = g o gamma0 the half-density mismatch
    # at the true warp equals int (g o gamma0)^2 (1 - sqrt(gamma0'))^2 > 0,
    # while the other three vanish.
    from clrwarp.warp import clr_forward

    g = make_toy_pair("inverse_seesaw", GRID)[1]
    t = GRID.nodes
    gamma0 = t + 0.22 * np.sin(np.pi * t)
    vel0 = 1 + 0.22 * np.pi * np.cos(np.pi * t)
    truth = clr_inverse(clr_forward(vel0, GRID), GRID)
    g_interp = AlignmentContext.build(g, g, identity_warp(GRID)).g_interp
    ctx = AlignmentContext.build(g_interp(gamma0), g, truth)

    dense = np.linspace(0, 1, 200_001)
    gd = 0.6 * np.exp(-((dense + 0.22 * np.sin(np.pi * dense) - 0.3) ** 2) / 0.02)
    gd += 1.5 * np.exp(-((dense + 0.22 * np.sin(np.pi * dense) - 0.7) ** 2) / 0.0032)
    bias = trapezoid(gd**2 * (1 - np.sqrt(1 + 0.22 * np.pi * np.cos(np.pi * dense))) ** 2, dense)

    d3 = evaluate_mismatch(MethodId.ISOMETRY, ctx)
    assert d3 == pytest.approx(bias, rel=1e-3)
    assert d3 > 1e-3
    for m in (MethodId.STANDARD, MethodId.SYMMETRIC, MethodId.JACOBIAN):
        assert evaluate_mismatch(m, ctx) < 1e-6


def test_seesaw_pair_has_amplitude_mismatch_at_truth():
    f, g, truth = make_toy_pair("inverse_seesaw", GRID)
    ctx = AlignmentContext.build(f, g, truth.warp)
    values = [evaluate_mismatch(m, ctx) for m in ALL_METHODS]
    assert min(values) > 0.05


@given(seeds)
def test_kernel_endpoint_and_non_negativity(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    f, g = smooth_pair(rng, GRID)
    ctx = AlignmentContext.build(f, g, random_warp(rng))
    assert adjoint_kernel(MethodId.STANDARD, ctx)[-1] == 0.0
    for m in ALL_METHODS:
        assert evaluate_mismatch(m, ctx) >= 0
        _, m_jac = kernel_forces(m, ctx)
        assert adjoint_kernel(m, ctx)[-1] == pytest.approx(m_jac[-1], abs=1e-15)


def test_gradient_field_examples(rng):
    w = random_warp(rng)
    assert not np.any(frechet_gradient_field(np.zeros(1000), w))
    np.testing.assert_allclose(frechet_gradient_field(np.full(1000, 2.5), w), 0.0, atol=1e-13)
    with pytest.raises(ValueError):
        frechet_gradient_field(np.zeros(999), w)


@given(seeds)
def test_gradient_field_integrates_to_zero(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    w = random_warp(rng, 0.6)
    field = frechet_gradient_field(rng.normal(size=1000), w)
    assert abs(trapezoid_integral(field, GRID)) < 1e-8


@pytest.mark.parametrize("method", ALL_METHODS)
def test_directional_derivatives_match_finite_differences(method):
    rng = np.random.Generator(np.random.PCG64(int(method)))
    grid = Grid(400)
    basis = build_centered_basis(10, grid)
    for _ in range(20):
        f, g = smooth_pair(rng, grid)
        c = rng.normal(0, 0.3, 10)
        h = rng.normal(0, 1, 10)

        def d(x):
            w = clr_inverse(basis.eval_matrix @ x, grid)
            return evaluate_mismatch(method, AlignmentContext.build(f, g, w))

        eps = 1e-6
        fd = (d(c + eps * h) - d(c - eps * h)) / (2 * eps)
        ctx = AlignmentContext.build(f, g, clr_inverse(basis.eval_matrix @ c, grid))
        field = frechet_gradient_field(discrete_adjoint_kernel(method, ctx), ctx.warp)
        analytic = trapezoid_integral(field * (basis.eval_matrix @ h), grid)
        assert analytic == pytest.approx(fd, rel=1e-4, abs=1e-9)


@pytest.mark.parametrize("method", ALL_METHODS)
def test_continuous_kernel_converges_to_discrete(method, rng):
    # the two kernels differ only by O(h) endpoint terms
    f, g = smooth_pair(rng, GRID)
    ctx = AlignmentContext.build(f, g, random_warp(rng))
    a = adjoint_kernel(method, ctx)
    b = discrete_adjoint_kernel(method, ctx)
    np.testing.assert_array_equal(a[1:-1], b[1:-1])
    assert np.abs(a - b).max() < 50 * GRID.spacing


def test_main_text_symmetric_kernel_fails_the_oracle():
    # the r^2 (instead of r^2/2) Jacobian force gives a wrong gradient
    rng = np.random.Generator(np.random.PCG64(7))
    grid = Grid(400)
    basis = build_centered_basis(10, grid)
    f, g = smooth_pair(rng, grid)
    c = rng.normal(0, 0.3, 10)
    ctx = AlignmentContext.build(f, g, clr_inverse(basis.eval_matrix @ c, grid))
    right = discrete_adjoint_kernel(MethodId.SYMMETRIC, ctx)
    wrong = right + 0.5 * ctx.residual**2
    proj = basis.weighted_eval_matrix.T
    g_right = proj @ frechet_gradient_field(right, ctx.warp)
    g_wrong = proj @ frechet_gradient_field(wrong, ctx.warp)

    def d(x):
        w = clr_inverse(basis.eval_matrix @ x, grid)
        return evaluate_mismatch(MethodId.SYMMETRIC, AlignmentContext.build(f, g, w))

    fd = np.array([(d(c + 1e-6 * e) - d(c - 1e-6 * e)) / 2e-6 for e in np.eye(10)])
    scale = np.abs(fd).max()
    assert np.abs(g_right - fd).max() / scale < 1e-4
    assert np.abs(g_wrong - fd).max() / scale > 1e-2


@pytest.mark.parametrize("method", [MethodId.SYMMETRIC, MethodId.ISOMETRY, MethodId.JACOBIAN])
def test_symmetric_methods_are_inverse_consistent(method):
    rng = np.random.Generator(np.random.PCG64(100 + int(method)))
    for _ in range(10):
        f, g = smooth_pair(rng, GRID)
        w = random_warp(rng, 0.3)
        fwd = evaluate_mismatch(method, AlignmentContext.build(f, g, w))
        bwd = evaluate_mismatch(method, AlignmentContext.build(g, f, invert_warp(w)))
        assert abs(fwd - bwd) / max(fwd, 1e-9) < 5e-3


def test_standard_method_breaks_symmetry():
    t = GRID.nodes
    g = np.exp(-((t - 0.25) ** 2) / (2 * 0.06**2))
    f = 0.2 * np.exp(-((t - 0.7) ** 2) / (2 * 0.06**2))
    w = clr_inverse(1.5 * (t - 0.5), GRID)
    fwd = evaluate_mismatch(MethodId.STANDARD, AlignmentContext.build(f, g, w))
    bwd = evaluate_mismatch(MethodId.STANDARD, AlignmentContext.build(g, f, invert_warp(w)))
    assert abs(fwd - bwd) / fwd > 0.1
    for m in (MethodId.SYMMETRIC, MethodId.ISOMETRY, MethodId.JACOBIAN):
        fwd = evaluate_mismatch(m, AlignmentContext.build(f, g, w))
        bwd = evaluate_mismatch(m, AlignmentContext.build(g, f, invert_warp(w)))
        assert abs(fwd - bwd) / fwd < 5e-3

import numpy as np
import pytest

from beqt2d import spectral
from beqt2d.fields import Grid, VelocityField
from beqt2d.spectral import (
    dealias,
    derivative,
    divergence_max,
    forward,
    inverse,
    invert_helmholtz,
    leray_project,
    resample,
)

from conftest import band_limited, random_velocity


def test_roundtrip_random():
    rng = np.random.default_rng(0)
    f = rng.standard_normal((64, 64))
    g = inverse(forward(f))
    assert np.abs(g - f).max() <= 1e-12 * np.abs(f).max()


def test_constant_single_mode():
    F = forward(np.ones((16, 16)))
    C = F.coeffs.copy()
    assert C[0, 0] == pytest.approx(1.0)
    C[0, 0] = 0.0
    assert np.abs(C).max() <= 1e-15


def test_sin_two_modes():
    grid = Grid(32)
    x1, _ = grid.coords()
    C = forward(np.sin(2 * np.pi * x1)).coeffs
    nz = np.argwhere(np.abs(C) > 1e-12)
    assert {tuple(ij) for ij in nz} == {(1, 0), (31, 0)}  # k = (+1, 0), (-1, 0)


def test_derivative_single_mode():
    grid = Grid(32)
    x1, x2 = grid.coords()
    F = forward(np.sin(2 * np.pi * x1))
    d = inverse(derivative(F, axis=1))
    assert np.abs(d - 2 * np.pi * np.cos(2 * np.pi * x1)).max() <= 1e-12 * 2 * np.pi


def test_laplacian_hand_value():
    grid = Grid(32)
    x1, x2 = grid.coords()
    f = np.sin(2 * np.pi * x1) * np.sin(2 * np.pi * x2)
    F = forward(f)
    lap = inverse(derivative(F, 1, 2)) + inverse(derivative(F, 2, 2))
    assert np.abs(lap + 8 * np.pi**2 * f).max() <= 1e-12 * 8 * np.pi**2


def test_derivative_of_constant_is_zero():
    F = forward(np.full((16, 16), 3.7))
    assert np.abs(inverse(derivative(F, 1))).max() <= 1e-14
    assert np.abs(inverse(derivative(F, 2, 2))).max() <= 1e-14


def test_derivative_axis_validation():
    F = forward(np.zeros((16, 16)))
    with pytest.raises(ValueError):
        derivative(F, 3)
    with pytest.raises(ValueError):
        derivative(F, 1, 4)


def test_dealias_below_cutoff_unchanged():
    rng = np.random.default_rng(1)
    f = band_limited(rng, 64, kmax=21)
    g = inverse(dealias(forward(f)))
    assert np.abs(g - f).max() <= 1e-13


def test_dealias_kills_high_mode():
    grid = Grid(32)
    x1, _ = grid.coords()
    f = np.cos(2 * np.pi * 15 * x1)  # k = n/2 - 1 = 15 > 32/3
    g = inverse(dealias(forward(f)))
    assert np.abs(g).max() <= 1e-13


def test_dealias_idempotent():
    rng = np.random.default_rng(2)
    F = forward(rng.standard_normal((32, 32)))
    once = dealias(F).coeffs
    twice = dealias(dealias(F)).coeffs
    assert np.array_equal(once, twice)


def test_dealias_product_fine_grid_oracle():
    rng = np.random.default_rng(3)
    n = 64
    a = band_limited(rng, n, kmax=n // 3)
    b = band_limited(rng, n, kmax=n // 3)
    coarse = inverse(dealias(forward(a * b)))
    fine = resample(a, 2 * n) * resample(b, 2 * n)
    oracle = inverse(dealias(forward(resample(fine, n))))
    assert np.abs(coarse - oracle).max() <= 1e-12 * max(1.0, np.abs(oracle).max())


def test_leray_fixes_divergence_free(grid64):
    rng = np.random.default_rng(4)
    u = random_velocity(rng, grid64)
    Pu = leray_project(u)
    assert np.abs(Pu.u1 - u.u1).max() <= 1e-12
    assert np.abs(Pu.u2 - u.u2).max() <= 1e-12


def test_leray_kills_gradients(grid64):
    rng = np.random.default_rng(5)
    phi = band_limited(rng, 64, kmax=10)
    F = forward(phi)
    u = VelocityField(
        inverse(derivative(F, 1)), inverse(derivative(F, 2)), grid64
    )
    Pu = leray_project(u)
    assert np.abs(Pu.u1).max() <= 1e-12 * max(1.0, np.abs(u.u1).max())
    assert np.abs(Pu.u2).max() <= 1e-12 * max(1.0, np.abs(u.u2).max())


def test_leray_idempotent_and_divfree(grid64):
    rng = np.random.default_rng(6)
    u = VelocityField(rng.standard_normal((64, 64)), rng.standard_normal((64, 64)), grid64)
    Pu = leray_project(u)
    PPu = leray_project(Pu)
    assert np.abs(PPu.u1 - Pu.u1).max() <= 1e-12
    norm = np.sqrt(np.mean(Pu.u1**2 + Pu.u2**2))
    assert divergence_max(Pu) <= 1e-12 * max(1.0, norm)
    # zero mean
    assert abs(Pu.u1.mean()) <= 1e-14 and abs(Pu.u2.mean()) <= 1e-14


def test_leray_self_adjoint(grid64):
    rng = np.random.default_rng(7)
    u = VelocityField(rng.standard_normal((64, 64)), rng.standard_normal((64, 64)), grid64)
    v = VelocityField(rng.standard_normal((64, 64)), rng.standard_normal((64, 64)), grid64)
    Pu, Pv = leray_project(u), leray_project(v)
    lhs = np.mean(Pu.u1 * v.u1 + Pu.u2 * v.u2)
    rhs = np.mean(u.u1 * Pv.u1 + u.u2 * Pv.u2)
    assert abs(lhs - rhs) <= 1e-12


def test_helmholtz_constant_unchanged():
    f = np.full((16, 16), 2.5)
    g = inverse(invert_helmholtz(forward(f), alpha=0.3))
    assert np.abs(g - f).max() <= 1e-13


def test_helmholtz_single_mode_symbol():
    grid = Grid(32)
    x1, _ = grid.coords()
    f = np.sin(2 * np.pi * x1)
    g = inverse(invert_helmholtz(forward(f), alpha=1.0))
    assert np.abs(g - f / (1 + 4 * np.pi**2)).max() <= 1e-13


def test_helmholtz_residual():
    rng = np.random.default_rng(8)
    f = band_limited(rng, 64, kmax=20)
    alpha = 0.17
    G = invert_helmholtz(forward(f), alpha)
    lap = inverse(derivative(G, 1, 2)) + inverse(derivative(G, 2, 2))
    resid = inverse(G) - alpha * lap - f
    assert np.abs(resid).max() <= 1e-12 * np.abs(f).max()


def test_helmholtz_alpha_validation():
    with pytest.raises(ValueError):
        invert_helmholtz(forward(np.zeros((16, 16))), alpha=0.0)


def test_helmholtz_commutes_with_derivative():
    rng = np.random.default_rng(9)
    F = forward(band_limited(rng, 32, kmax=9))
    a = derivative(invert_helmholtz(F, 0.4), 1).coeffs
    b = invert_helmholtz(derivative(F, 1), 0.4).coeffs
    assert np.abs(a - b).max() <= 1e-14


def test_resample_band_limited_roundtrip():
    rng = np.random.default_rng(10)
    f = band_limited(rng, 32, kmax=10)
    up = resample(f, 64)
    back = resample(up, 32)
    assert np.abs(back - f).max() <= 1e-12
    # upsampling interpolates: coarse points are a subset of fine points
    assert np.abs(up[::2, ::2] - f).max() <= 1e-12

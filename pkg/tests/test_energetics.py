import numpy as np
import pytest

from beqt2d.energetics import (
    bulk_density,
    bulk_force,
    energy_lower_bound,
    free_energy,
    h_l2,
    linearized_F,
    molecular_field,
    relax_to_equilibrium,
)
from beqt2d.fields import Grid, Parameters, QTensorField

from conftest import random_q

EQ = np.sqrt(0.5)  # constant equilibrium p for a=-1, c=1: p^2+q^2 = -a/(2c)


def test_bulk_density_values(params):
    grid = Grid(16)
    assert np.all(bulk_density(QTensorField.zeros(grid), params) == 0.0)
    Q = QTensorField.constant(grid, 0.5, 0.5)  # p^2+q^2 = 1/2
    assert np.allclose(bulk_density(Q, params), -0.25, atol=1e-15)


def test_bulk_density_minimizer_one_var_oracle(params):
    # scan f(r2) = a r2 + c r2^2 over constants; minimum at r2 = -a/(2c)
    grid = Grid(8)
    r2_grid = np.linspace(0, 2, 20001)
    vals = params.a * r2_grid + params.c * r2_grid**2
    r2_star = r2_grid[np.argmin(vals)]
    assert r2_star == pytest.approx(-params.a / (2 * params.c), abs=1e-4)
    Q = QTensorField.constant(grid, np.sqrt(r2_star), 0.0)
    assert bulk_density(Q, params)[0, 0] == pytest.approx(
        -params.a**2 / (4 * params.c), abs=1e-7
    )


def test_free_energy_zero_and_constant(params):
    grid = Grid(16)
    assert free_energy(QTensorField.zeros(grid), params) == 0.0
    Q = QTensorField.constant(grid, 0.5, 0.5)
    assert free_energy(Q, params) == pytest.approx(-0.25, abs=1e-14)


def test_free_energy_vs_finite_difference_quadrature(params):
    # p = eps sin(2 pi x1): F = L eps^2 (2 pi)^2 / 2 ... evaluated against an
    # independent 4th-order finite-difference quadrature on a denser grid
    eps = 0.05
    n_f = 512
    x = np.arange(n_f) / n_f
    X1, _ = np.meshgrid(x, x, indexing="ij")
    p_f = eps * np.sin(2 * np.pi * X1)
    h = 1.0 / n_f

    def fd_grad_sq(f):
        gx = (-np.roll(f, -2, 0) + 8 * np.roll(f, -1, 0) - 8 * np.roll(f, 1, 0) + np.roll(f, 2, 0)) / (12 * h)
        gy = (-np.roll(f, -2, 1) + 8 * np.roll(f, -1, 1) - 8 * np.roll(f, 1, 1) + np.roll(f, 2, 1)) / (12 * h)
        return gx**2 + gy**2

    r2 = p_f**2
    fd_value = np.mean(params.L * fd_grad_sq(p_f) + params.a * r2 + params.c * r2**2)

    grid = Grid(64)
    x1, _ = grid.coords()
    Q = QTensorField(eps * np.sin(2 * np.pi * x1), np.zeros((64, 64)), grid)
    assert free_energy(Q, params) == pytest.approx(fd_value, rel=1e-8)


def test_molecular_field_zero_and_equilibrium(params):
    grid = Grid(16)
    H = molecular_field(QTensorField.zeros(grid), params)
    assert np.all(H.p == 0.0) and np.all(H.q == 0.0)
    Q = QTensorField.constant(grid, 0.5, 0.5)  # a + c tr(Q^2) = 0
    H = molecular_field(Q, params)
    assert np.abs(H.p).max() <= 1e-14 and np.abs(H.q).max() <= 1e-14


def test_molecular_field_is_variational_gradient(params):
    # <-H, dQ> approximates dF/deps at second order in eps
    rng = np.random.default_rng(0)
    grid = Grid(32)
    Q = random_q(rng, grid, kmax=6, amp=0.5)
    dQ = random_q(rng, grid, kmax=6, amp=0.5)
    H = molecular_field(Q, params)
    pairing = np.mean(-2.0 * (H.p * dQ.p + H.q * dQ.q))
    errs = []
    for eps in (1e-3, 1e-4):
        Fp = free_energy(QTensorField(Q.p + eps * dQ.p, Q.q + eps * dQ.q, grid), params)
        Fm = free_energy(QTensorField(Q.p - eps * dQ.p, Q.q - eps * dQ.q, grid), params)
        errs.append(abs((Fp - Fm) / (2 * eps) - pairing))
    assert errs[0] <= 1e-5
    assert errs[1] <= errs[0] / 10  # O(eps^2) between eps = 1e-3 and 1e-4


def test_linearized_F_at_zero(params):
    grid = Grid(16)
    rng = np.random.default_rng(1)
    X = random_q(rng, grid, kmax=4)
    d = linearized_F(QTensorField.zeros(grid), X, params)
    assert np.allclose(d.p, -params.a * X.p, atol=1e-15)
    assert np.allclose(d.q, -params.a * X.q, atol=1e-15)


def test_linearized_F_finite_difference(params):
    rng = np.random.default_rng(2)
    grid = Grid(16)
    Q = random_q(rng, grid, kmax=4, amp=0.7)
    X = random_q(rng, grid, kmax=4, amp=0.7)
    d = linearized_F(Q, X, params)
    eps = 1e-6
    Qp = QTensorField(Q.p + eps * X.p, Q.q + eps * X.q, grid)
    Qm = QTensorField(Q.p - eps * X.p, Q.q - eps * X.q, grid)
    fp, fm = bulk_force(Qp, params), bulk_force(Qm, params)
    fd_p = (fp.p - fm.p) / (2 * eps)
    fd_q = (fp.q - fm.q) / (2 * eps)
    assert np.abs(d.p - fd_p).max() <= 1e-8
    assert np.abs(d.q - fd_q).max() <= 1e-8


def test_linearized_F_bilinear_symmetry(params):
    rng = np.random.default_rng(3)
    grid = Grid(16)
    Q = random_q(rng, grid, kmax=4, amp=0.6)
    X = random_q(rng, grid, kmax=4, amp=0.6)
    Y = random_q(rng, grid, kmax=4, amp=0.6)
    dX = linearized_F(Q, X, params)
    dY = linearized_F(Q, Y, params)
    lhs = np.mean(2.0 * (dX.p * Y.p + dX.q * Y.q))
    rhs = np.mean(2.0 * (dY.p * X.p + dY.q * X.q))
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))


def test_energy_lower_bound_on_random_states(params):
    rng = np.random.default_rng(4)
    grid = Grid(32)
    bound = energy_lower_bound(params)
    for amp in (0.3, 1.0, 2.5):
        Q = random_q(rng, grid, kmax=8, amp=amp)
        # u contributes nonnegative kinetic energy; Q part alone must beat it
        total = params.lam * free_energy(Q, params)
        assert total >= bound


def test_relax_fixed_point(params):
    grid = Grid(16)
    Q0 = QTensorField.constant(grid, EQ, 0.0)
    result = relax_to_equilibrium(Q0, params, tol=1e-12)
    assert result.converged and result.steps == 0
    assert result.residual <= 1e-12
    assert np.array_equal(result.Q.p, Q0.p)


def test_relax_from_perturbation(params):
    rng = np.random.default_rng(5)
    grid = Grid(32)
    noise = random_q(rng, grid, kmax=5, amp=0.05)
    Q0 = QTensorField(EQ + noise.p, noise.q, grid)
    F0 = free_energy(Q0, params)
    result = relax_to_equilibrium(Q0, params, tol=1e-10)
    assert result.converged
    assert result.residual <= 1e-10
    assert result.energy <= F0 + 1e-12
    # the elliptic equation holds at the reported tolerance
    assert h_l2(result.Q, params) <= 1e-10


def test_relax_convex_bulk_goes_to_zero():
    params = Parameters(a=1.0)  # convex bulk: unique minimizer Q = 0
    rng = np.random.default_rng(6)
    grid = Grid(32)
    Q0 = random_q(rng, grid, kmax=5, amp=0.5)
    result = relax_to_equilibrium(Q0, params, tol=1e-10)
    assert result.converged
    assert np.abs(result.Q.p).max() <= 1e-9
    assert np.abs(result.Q.q).max() <= 1e-9


def test_relax_reports_nonconvergence(params):
    rng = np.random.default_rng(7)
    grid = Grid(32)
    Q0 = random_q(rng, grid, kmax=5, amp=0.4)
    result = relax_to_equilibrium(Q0, params, tol=1e-12, max_steps=3)
    assert not result.converged
    assert result.residual > 1e-12
    assert result.steps == 3

"""Landau-de Gennes free energy, molecular field, and equilibrium relaxation.

In the (p, q) representation the bulk density is

    f_B(Q) = (a/2) tr(Q^2) + (c/4) tr^2(Q^2) = a (p^2+q^2) + c (p^2+q^2)^2

(the cubic bulk term is identically zero in 2D) and the free energy is

    F(Q) = int (L/2) |grad Q|^2 + f_B(Q) dx,   |grad Q|^2 = 2(|grad p|^2 + |grad q|^2).

The molecular field H = L Lap Q - a Q - c tr(Q^2) Q is minus the variational
derivative of F with respect to Q in the Frobenius inner product
<A, B> = int A_ij B_ij dx = int 2 (A_p B_p + A_q B_q) dx; this pairing is the
one used for all tensor L^2 norms in the package.

Quadrature: gradient terms by the exact Parseval sum, bulk terms by grid
means (both spectrally accurate; they agree exactly on band-limited data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .fields import Parameters, QTensorField, tr_q2
from .spectral import TWO_PI

__all__ = [
    "EnergyBreakdown",
    "RelaxResult",
    "bulk_density",
    "free_energy",
    "molecular_field",
    "linearized_F",
    "bulk_force",
    "lower_bound_constant",
    "energy_lower_bound",
    "relax_to_equilibrium",
    "h_l2",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    """Total energy split: (1/2)||u||^2 + lam*(L/2)||grad Q||^2 + lam*int f_B."""

    kinetic: float
    elastic: float
    bulk: float

    @property
    def total(self) -> float:
        return self.kinetic + self.elastic + self.bulk


def bulk_density(Q: QTensorField, params: Parameters) -> np.ndarray:
    """Pointwise f_B(Q) = a (p^2+q^2) + c (p^2+q^2)^2."""
    r2 = Q.p**2 + Q.q**2
    return params.a * r2 + params.c * r2**2


def free_energy(Q: QTensorField, params: Parameters) -> float:
    """F(Q) = int (L/2)|grad Q|^2 + f_B(Q) dx (without the lam factor)."""
    n = Q.grid.n
    w = TWO_PI**2 * spectral.rsymbols(n)["k2sum"]
    grad_sq = spectral.rparseval(spectral.rfwd(np.stack([Q.p, Q.q])), weight=w)
    return params.L * grad_sq + float(bulk_density(Q, params).mean())


def molecular_field(Q: QTensorField, params: Parameters, lap=None) -> QTensorField:
    """H(Q) = L Lap Q - a Q - c tr(Q^2) Q, componentwise on (p, q).

    The Laplacian is spectral; the bulk part is the exact collocation
    gradient of the grid-quadrature bulk energy (no dealiasing here), so
    <-H, dQ> matches finite differences of free_energy to the order of the
    difference scheme.  Precomputed Laplacians (lap_p, lap_q) may be passed.
    """
    if lap is None:
        lap_p = spectral.inv(spectral.lap_hat(spectral.fwd(Q.p)))
        lap_q = spectral.inv(spectral.lap_hat(spectral.fwd(Q.q)))
    else:
        lap_p, lap_q = lap
    coef = params.a + 2.0 * params.c * (Q.p**2 + Q.q**2)
    return QTensorField(params.L * lap_p - coef * Q.p, params.L * lap_q - coef * Q.q, Q.grid)


def bulk_force(Q: QTensorField, params: Parameters) -> QTensorField:
    """F(Q) = -a Q - c tr(Q^2) Q, the algebraic (non-diffusive) part of H."""
    coef = params.a + 2.0 * params.c * (Q.p**2 + Q.q**2)
    return QTensorField(-coef * Q.p, -coef * Q.q, Q.grid)


def linearized_F(Q: QTensorField, X: QTensorField, params: Parameters) -> QTensorField:
    """Directional derivative dF(Q)[X] = -a X - c (tr(Q^2) X + 2 tr(QX) Q)."""
    r2 = Q.p**2 + Q.q**2
    trQX = Q.p * X.p + Q.q * X.q  # = tr(QX)/2
    dp = -params.a * X.p - 2.0 * params.c * (r2 * X.p + 2.0 * trQX * Q.p)
    dq = -params.a * X.q - 2.0 * params.c * (r2 * X.q + 2.0 * trQX * Q.q)
    return QTensorField(dp, dq, Q.grid)


def lower_bound_constant(params: Parameters) -> float:
    """A constant M > 0 with f_B >= -(M/2) tr(Q^2) + (c/8) tr^2(Q^2).

    With no cubic term the chain of inequalities needs only M >= -a, and
    Young's inequality then gives
    f_B >= (1/2) tr(Q^2) + (c/16) tr^2(Q^2) - (M+1)^2 / c.
    Any such M is admissible; we take the smallest convenient one.
    """
    return max(1.0, -params.a)


def energy_lower_bound(params: Parameters) -> float:
    """Uniform lower bound for the total energy: -lam (M+1)^2 / c (area 1)."""
    M = lower_bound_constant(params)
    return -params.lam * (M + 1.0) ** 2 / params.c


def h_l2(Q: QTensorField, params: Parameters) -> float:
    """||H(Q)||_{L^2} in the Frobenius pairing."""
    H = molecular_field(Q, params)
    return float(np.sqrt(np.mean(2.0 * (H.p**2 + H.q**2))))


@dataclass
class RelaxResult:
    Q: QTensorField
    residual: float
    converged: bool
    steps: int
    energy: float


def _relax_dt(Q: QTensorField, params: Parameters) -> float:
    # half the explicit-reaction stability bound, same rule as the stepper
    tr_max = float(tr_q2(Q).max())
    return 0.5 / (params.gamma * (abs(params.a) + 3.0 * params.c * tr_max))


def relax_to_equilibrium(
    Q0: QTensorField,
    params: Parameters,
    tol: float = 1e-10,
    max_steps: int = 200_000,
) -> RelaxResult:
    """Integrate Q_t = Gamma H(Q) (u = 0) until ||H||_{L^2} <= tol.

    The diffusion L Lap Q is treated implicitly (diagonal Helmholtz solve),
    the bulk force explicitly with a step inside its stability bound.  The
    free energy must be non-increasing along iterates; a rise beyond
    1e-10 (1 + |F|) indicates a broken formula and raises.
    """
    if not tol > 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    Q = Q0.copy()
    res = h_l2(Q, params)
    F_prev = free_energy(Q, params)
    steps = 0
    while res > tol and steps < max_steps:
        dt = _relax_dt(Q, params)
        g = bulk_force(Q, params)
        denom_alpha = params.gamma * params.L * dt
        ph = spectral.dealias_hat(spectral.fwd(Q.p + dt * params.gamma * g.p))
        qh = spectral.dealias_hat(spectral.fwd(Q.q + dt * params.gamma * g.q))
        Q = QTensorField(
            spectral.inv(spectral.helmholtz_hat(ph, denom_alpha)),
            spectral.inv(spectral.helmholtz_hat(qh, denom_alpha)),
            Q.grid,
        )
        steps += 1
        F_now = free_energy(Q, params)
        if F_now > F_prev + 1e-10 * (1.0 + abs(F_prev)):
            raise RuntimeError(
                f"free energy increased during relaxation: {F_prev!r} -> {F_now!r} at step {steps}"
            )
        F_prev = F_now
        res = h_l2(Q, params)
    return RelaxResult(Q, res, res <= tol, steps, F_prev)

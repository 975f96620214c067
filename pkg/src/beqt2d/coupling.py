"""Fluid / order-parameter interaction: advection, stretching, stresses.

Index convention, fixed once and locked by a Taylor-Green test:
(grad u)_ij = d u_i / d x_j, so D = (grad u + grad^T u)/2 and
Omega = (grad u - grad^T u)/2 with Omega_12 = (d2 u1 - d1 u2)/2.

For 2x2 symmetric traceless matrices the anticommutator identity
A B + B A = tr(AB) I collapses the stretching and stress formulas:

    S(grad u, Q) = xi D + (Omega Q - Q Omega) - 2 xi tr(Q D) Q
    tau          = -xi H + 2 xi tr(Q H) Q - L grad Q (.) grad Q
    sigma        = Q H - H Q = 2 (p H_q - q H_p) [[0, 1], [-1, 0]]

with (grad Q (.) grad Q)_ij = 2 (d_i p d_j p + d_i q d_j q).  The stretching
operator is still evaluated in full matrix form first (its symmetry and
tracelessness then act as a structural self-check) and reduced to (p, q)
afterwards; the other operations use the reduced expansions directly, with
full-matrix fine-grid oracles in the test-suite.

Nonlinear products are formed pointwise in physical space on band-limited
inputs; operations that feed the stepper dealias their output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .energetics import molecular_field
from .fields import Grid, Parameters, QTensorField, VelocityField

__all__ = [
    "Tensor2Field",
    "InternalConsistencyError",
    "velocity_gradient",
    "stretching",
    "stress_tau",
    "stress_sigma",
    "elastic_force",
    "advect_q",
]


class InternalConsistencyError(RuntimeError):
    """A structural identity (symmetry/trace) failed beyond tolerance,
    signalling a formula bug rather than a numerical issue."""


@dataclass
class Tensor2Field:
    """General (not necessarily symmetric) 2x2 tensor field."""

    t11: np.ndarray
    t12: np.ndarray
    t21: np.ndarray
    t22: np.ndarray
    grid: Grid

    @classmethod
    def zeros(cls, grid: Grid) -> "Tensor2Field":
        return cls(grid.zeros(), grid.zeros(), grid.zeros(), grid.zeros(), grid)

    def as_matrix(self):
        return [[self.t11, self.t12], [self.t21, self.t22]]


def _grad_q(Q: QTensorField):
    """(d1 p, d2 p, d1 q, d2 q) by spectral differentiation."""
    ph = spectral.fwd(Q.p)
    qh = spectral.fwd(Q.q)
    return (
        spectral.inv(spectral.deriv_hat(ph, 0)),
        spectral.inv(spectral.deriv_hat(ph, 1)),
        spectral.inv(spectral.deriv_hat(qh, 0)),
        spectral.inv(spectral.deriv_hat(qh, 1)),
    )


def velocity_gradient(u: VelocityField):
    """Velocity gradient and its symmetric/skew parts: (gradu, D, Omega)."""
    u1h = spectral.fwd(u.u1)
    u2h = spectral.fwd(u.u2)
    g11 = spectral.inv(spectral.deriv_hat(u1h, 0))
    g12 = spectral.inv(spectral.deriv_hat(u1h, 1))
    g21 = spectral.inv(spectral.deriv_hat(u2h, 0))
    g22 = spectral.inv(spectral.deriv_hat(u2h, 1))
    gradu = Tensor2Field(g11, g12, g21, g22, u.grid)
    d12 = 0.5 * (g12 + g21)
    D = Tensor2Field(g11, d12, d12, g22, u.grid)
    w = 0.5 * (g12 - g21)
    Omega = Tensor2Field(np.zeros_like(w), w, -w, np.zeros_like(w), u.grid)
    return gradu, D, Omega


def stretching(
    gradu: Tensor2Field,
    D: Tensor2Field,
    Omega: Tensor2Field,
    Q: QTensorField,
    params: Parameters,
    dealias_output: bool = True,
) -> QTensorField:
    """S(grad u, Q) = (xi D + Om)(Q + I/2) + (Q + I/2)(xi D - Om) - 2 xi (Q + I/2) tr(Q grad u).

    Evaluated in full matrix form; the result must be symmetric and traceless
    to near machine precision (the coupled system preserves both), which is
    checked before reducing to (p, q).
    """
    xi = params.xi
    p, q = Q.p, Q.q
    qt11, qt12, qt22 = p + 0.5, q, 0.5 - p  # Q + I/2
    a11, a12 = xi * D.t11 + Omega.t11, xi * D.t12 + Omega.t12
    a21, a22 = xi * D.t21 + Omega.t21, xi * D.t22 + Omega.t22
    b11, b12 = xi * D.t11 - Omega.t11, xi * D.t12 - Omega.t12
    b21, b22 = xi * D.t21 - Omega.t21, xi * D.t22 - Omega.t22
    # tr(Q grad u) with (grad u)_ij = d_j u_i
    trQG = p * (gradu.t11 - gradu.t22) + q * (gradu.t21 + gradu.t12)
    corr = 2.0 * xi * trQG
    s11 = a11 * qt11 + a12 * qt12 + qt11 * b11 + qt12 * b21 - corr * qt11
    s12 = a11 * qt12 + a12 * qt22 + qt11 * b12 + qt12 * b22 - corr * qt12
    s21 = a21 * qt11 + a22 * qt12 + qt12 * b11 + qt22 * b21 - corr * qt12
    s22 = a21 * qt12 + a22 * qt22 + qt12 * b12 + qt22 * b22 - corr * qt22

    scale = float(np.abs(s11).max() + np.abs(s12).max())
    asym = float(np.abs(s12 - s21).max())
    trace = float(np.abs(s11 + s22).max())
    if max(asym, trace) > 1e-8 * (1.0 + scale):
        raise InternalConsistencyError(
            f"stretching matrix not in S0: asym={asym:.3e}, trace={trace:.3e}, scale={scale:.3e}"
        )

    sp = 0.5 * (s11 - s22)
    sq = 0.5 * (s12 + s21)
    if dealias_output:
        sp = spectral.inv(spectral.dealias_hat(spectral.fwd(sp)))
        sq = spectral.inv(spectral.dealias_hat(spectral.fwd(sq)))
    return QTensorField(sp, sq, Q.grid)


def stress_tau(
    Q: QTensorField,
    H: QTensorField,
    params: Parameters,
    grad_q=None,
) -> Tensor2Field:
    """Symmetric stress tau = -xi H + 2 xi tr(QH) Q - L grad Q (.) grad Q.

    H must be molecular_field(Q).  grad_q = (d1p, d2p, d1q, d2q) may be
    passed to reuse precomputed derivatives.
    """
    if grad_q is None:
        grad_q = _grad_q(Q)
    px, py, qx, qy = grad_q
    xi, L = params.xi, params.L
    trQH = 2.0 * (Q.p * H.p + Q.q * H.q)
    core_p = -xi * H.p + 2.0 * xi * trQH * Q.p
    core_q = -xi * H.q + 2.0 * xi * trQH * Q.q
    g11 = 2.0 * (px * px + qx * qx)
    g12 = 2.0 * (px * py + qx * qy)
    g22 = 2.0 * (py * py + qy * qy)
    t11 = core_p - L * g11
    t12 = core_q - L * g12
    t22 = -core_p - L * g22
    return Tensor2Field(t11, t12, t12.copy(), t22, Q.grid)


def stress_sigma(Q: QTensorField, H: QTensorField) -> Tensor2Field:
    """Skew stress sigma = Q H - H Q; only sigma_12 = 2 (p H_q - q H_p) is
    independent in 2D, the diagonal is structurally zero."""
    s = 2.0 * (Q.p * H.q - Q.q * H.p)
    z = np.zeros_like(s)
    return Tensor2Field(z, s, -s, z.copy(), Q.grid)


def _elastic_force_hat(Q: QTensorField, params: Parameters, H=None, grad_q=None):
    """Coefficients of lam div(tau + sigma), dealiased, zero mean."""
    if H is None:
        H = molecular_field(Q, params)
    tau = stress_tau(Q, H, params, grad_q=grad_q)
    sig = stress_sigma(Q, H)
    t11h = spectral.fwd(tau.t11)
    t22h = spectral.fwd(tau.t22)
    r12h = spectral.fwd(tau.t12 + sig.t12)  # row 1, column 2
    r21h = spectral.fwd(tau.t21 + sig.t21)
    f1 = spectral.deriv_hat(t11h, 0) + spectral.deriv_hat(r12h, 1)
    f2 = spectral.deriv_hat(r21h, 0) + spectral.deriv_hat(t22h, 1)
    f1 = params.lam * spectral.dealias_hat(f1)
    f2 = params.lam * spectral.dealias_hat(f2)
    f1[0, 0] = 0.0  # divergence of a periodic field has zero mean
    f2[0, 0] = 0.0
    return f1, f2


def elastic_force(Q: QTensorField, params: Parameters, H=None, grad_q=None) -> VelocityField:
    """lam div(tau + sigma), not yet Leray-projected."""
    f1, f2 = _elastic_force_hat(Q, params, H=H, grad_q=grad_q)
    return VelocityField(spectral.inv(f1), spectral.inv(f2), Q.grid)


def advect_q(u: VelocityField, Q: QTensorField, grad_q=None, dealias_output: bool = True) -> QTensorField:
    """Transport term u . grad Q, componentwise on (p, q)."""
    if grad_q is None:
        grad_q = _grad_q(Q)
    px, py, qx, qy = grad_q
    ap = u.u1 * px + u.u2 * py
    aq = u.u1 * qx + u.u2 * qy
    if dealias_output:
        ap = spectral.inv(spectral.dealias_hat(spectral.fwd(ap)))
        aq = spectral.inv(spectral.dealias_hat(spectral.fwd(aq)))
    return QTensorField(ap, aq, Q.grid)

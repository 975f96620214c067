"""Quantitative claims of the model turned into measurements.

Central quantities:

* E(t) = (1/2)||u||^2 + lam F(Q) with the exact dissipation balance
  dE/dt = -nu ||grad u||^2 - lam Gamma ||H||^2;
* A(t) = ||grad u||^2 + lam ||H(Q)||^2, the higher-order energy, and
  B = e + ln(e + A);
* the twelve-term identity for A along smooth solutions,

  (1/2) dA/dt + nu ||Lap u||^2 + lam Gamma L ||grad H||^2
      = J_1 + ... + J_12 + (1 - L) R,
  R = -lam int div(tau + sigma) . Lap u dx,

  evaluated term by term (identity_terms) and as a residual against probe
  steps (identity_residual).  The identity is usually stated with the
  elastic constant normalized to 1, where the H-dissipation reads
  lam Gamma ||grad H||^2 and R drops; for general L the terms coming from
  the Q-equation (J_2 and J_4 ... J_9) carry a factor L, J_3 is
  lam int u . grad F : H (its 1/L and the L from the Laplacian substitution
  cancel), and the R term is what is left of the stress/stretching
  cancellations.  Both forms coincide at L = 1; the general form is exact
  for every L (checked by the probe-step residual and a fine-grid oracle);
* the Lyapunov comparison functional Y(t) and a convergence-rate fitter for
  the decay to equilibrium (polynomial (1+t)^s vs exponential model).

Time derivatives in residuals use centered differences of probe steps, not
analytic differentiation of the scheme, so these measurements stay
independent of stepper internals.  All tensor L^2 norms use the Frobenius
pairing, ||Q||^2 = int tr(Q^2) dx = int 2(p^2+q^2) dx.

Two of the J terms deserve a note: in 2D the anticommutator of symmetric
traceless matrices is a multiple of the identity, so the D-Lap Q
anticommutator term and the grad D grad Q product term vanish identically
when contracted against the traceless H; they are computed anyway and act
as additional structural checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields
from typing import Optional, Sequence

import numpy as np

from . import spectral
from .coupling import advect_q, stress_sigma, stress_tau, stretching, velocity_gradient
from .energetics import (
    EnergyBreakdown,
    bulk_density,
    bulk_force,
    linearized_F,
    molecular_field,
)
from .fields import Parameters, QTensorField, SimState, VelocityField, tr_q2
from .spectral import TWO_PI
from .stepper import step

__all__ = [
    "DiagnosticsRow",
    "CSV_FIELDS",
    "total_energy",
    "higher_energy_A",
    "dissipation",
    "energy_law_residual",
    "identity_terms",
    "identity_residual",
    "omega_limit_check",
    "lyapunov_Y",
    "bulk_hessian_max",
    "suggested_mu",
    "RateFit",
    "fit_convergence_rate",
    "sample_row",
    "u_h1",
    "q_h1_dist",
    "q_h2_dist",
    "reconstruct_pressure",
]


# ----------------------------------------------------------------------
# norms

def grad_l2sq(f: np.ndarray) -> float:
    """||grad f||^2 by Parseval."""
    n = f.shape[0]
    w = TWO_PI**2 * spectral.rsymbols(n)["k2sum"]
    return spectral.rparseval(spectral.rfwd(f), weight=w)


def grad_u_l2sq(u: VelocityField) -> float:
    return grad_l2sq(u.u1) + grad_l2sq(u.u2)


def u_h1(u: VelocityField) -> float:
    """||u||_{H^1} = sqrt(||u||^2 + ||grad u||^2)."""
    l2sq = float(np.mean(u.u1**2 + u.u2**2))
    return math.sqrt(l2sq + grad_u_l2sq(u))


def h_l2sq(Q: QTensorField, params: Parameters) -> float:
    H = molecular_field(Q, params)
    return float(np.mean(2.0 * (H.p**2 + H.q**2)))


def _q_sobolev_dist(Q: QTensorField, Qref: QTensorField, m: int) -> float:
    """|| Q - Qref ||_{H^m} with the weight (1 + 4 pi^2 |k|^2)^m."""
    n = Q.grid.n
    w = (1.0 + TWO_PI**2 * spectral.rsymbols(n)["k2sum"]) ** m
    dp = spectral.rfwd(Q.p - Qref.p)
    dq = spectral.rfwd(Q.q - Qref.q)
    return math.sqrt(2.0 * (spectral.rparseval(dp, weight=w) + spectral.rparseval(dq, weight=w)))


def q_h1_dist(Q: QTensorField, Qref: QTensorField) -> float:
    return _q_sobolev_dist(Q, Qref, 1)


def q_h2_dist(Q: QTensorField, Qref: QTensorField) -> float:
    return _q_sobolev_dist(Q, Qref, 2)


# ----------------------------------------------------------------------
# energies

def total_energy(state: SimState, params: Parameters) -> EnergyBreakdown:
    kinetic = 0.5 * float(np.mean(state.u.u1**2 + state.u.u2**2))
    elastic = params.lam * params.L * (grad_l2sq(state.Q.p) + grad_l2sq(state.Q.q))
    bulk = params.lam * float(bulk_density(state.Q, params).mean())
    return EnergyBreakdown(kinetic, elastic, bulk)


def higher_energy_A(state: SimState, params: Parameters) -> float:
    """A = ||grad u||^2 + lam ||H(Q)||^2."""
    return grad_u_l2sq(state.u) + params.lam * h_l2sq(state.Q, params)


def dissipation(state: SimState, params: Parameters) -> float:
    """nu ||grad u||^2 + lam Gamma ||H||^2, the exact energy decay rate."""
    return params.nu * grad_u_l2sq(state.u) + params.lam * params.gamma * h_l2sq(
        state.Q, params
    )


def energy_law_residual(times: Sequence[float], energies: Sequence[float], dissipations: Sequence[float]):
    """Centered-difference defect of dE/dt = -dissipation on a uniformly
    sampled history.

    Returns (residual array over interior samples, max relative magnitude),
    the relative magnitude at a sample being |r| / (1 + dissipation).
    """
    t = np.asarray(times, dtype=float)
    E = np.asarray(energies, dtype=float)
    d = np.asarray(dissipations, dtype=float)
    if len(t) < 3:
        raise ValueError(f"need at least 3 samples, got {len(t)}")
    steps = np.diff(t)
    if np.abs(steps - steps[0]).max() > 1e-9 * max(abs(steps[0]), 1e-300):
        raise ValueError("samples are not uniformly spaced")
    dt = steps[0]
    r = (E[2:] - E[:-2]) / (2.0 * dt) + d[1:-1]
    rel = np.abs(r) / (1.0 + d[1:-1])
    return r, float(rel.max())


# ----------------------------------------------------------------------
# the twelve-term identity

def identity_terms(state: SimState, params: Parameters):
    """Evaluate the exact balance for dA/dt: returns (J, dissipation, R)
    with J the twelve terms, dissipation = (nu ||Lap u||^2,
    lam Gamma L ||grad H||^2), and R the general-L stress correction
    -lam int div(tau+sigma) . Lap u dx entering with weight (1 - L).

    All derivatives are spectral; products are formed pointwise (no
    intermediate truncation) and integrated by grid means, reflecting the
    identity as written for the continuum; the spatial defect this leaves is
    what the fine-grid comparison in the test-suite measures.  Directional
    derivatives of the bulk force go through energetics.linearized_F.
    """
    lam, L, xi, gamma = params.lam, params.L, params.xi, params.gamma
    u, Q = state.u, state.Q
    uc = [u.u1, u.u2]

    uh = [spectral.fwd(u.u1), spectral.fwd(u.u2)]
    # G[i][j] = d_j u_i ; d2u[i][j][k] = d_k d_j u_i ; lap_u[i]
    G = [[spectral.inv(spectral.deriv_hat(uh[i], j)) for j in range(2)] for i in range(2)]
    d2u = [
        [
            [spectral.inv(spectral.deriv_hat(spectral.deriv_hat(uh[i], j), k)) for k in range(2)]
            for j in range(2)
        ]
        for i in range(2)
    ]
    lap_u = [d2u[i][0][0] + d2u[i][1][1] for i in range(2)]

    ph = spectral.fwd(Q.p)
    qh = spectral.fwd(Q.q)
    dp = [spectral.inv(spectral.deriv_hat(ph, l)) for l in range(2)]
    dq = [spectral.inv(spectral.deriv_hat(qh, l)) for l in range(2)]
    d2p = [[spectral.inv(spectral.deriv_hat(spectral.deriv_hat(ph, l), k)) for k in range(2)] for l in range(2)]
    d2q = [[spectral.inv(spectral.deriv_hat(spectral.deriv_hat(qh, l), k)) for k in range(2)] for l in range(2)]
    lap_p = d2p[0][0] + d2p[1][1]
    lap_q = d2q[0][0] + d2q[1][1]

    def s0_matrix(a, b):
        return [[a, b], [b, -a]]

    Qm = s0_matrix(Q.p, Q.q)
    dQ = [s0_matrix(dp[l], dq[l]) for l in range(2)]  # dQ[l][i][j] = d_l Q_ij
    lapQ = s0_matrix(lap_p, lap_q)

    H = molecular_field(Q, params)
    Hm = s0_matrix(H.p, H.q)
    hph = spectral.fwd(H.p)
    hqh = spectral.fwd(H.q)
    dhp = [spectral.inv(spectral.deriv_hat(hph, l)) for l in range(2)]
    dhq = [spectral.inv(spectral.deriv_hat(hqh, l)) for l in range(2)]
    dH = [s0_matrix(dhp[l], dhq[l]) for l in range(2)]

    Fb = bulk_force(Q, params)  # F(Q) = -aQ - c tr(Q^2) Q
    fph = spectral.fwd(Fb.p)
    fqh = spectral.fwd(Fb.q)
    dfp = [spectral.inv(spectral.deriv_hat(fph, l)) for l in range(2)]
    dfq = [spectral.inv(spectral.deriv_hat(fqh, l)) for l in range(2)]

    def mean(x):
        return float(x.mean())

    def contract_H(M):
        # sum_ij M_ij H_ij for M symmetric traceless given as (m_p, m_q)
        mp, mq = M
        return 2.0 * (mp * H.p + mq * H.q)

    # J1: inertial term against Lap u
    adv = [uc[0] * G[i][0] + uc[1] * G[i][1] for i in range(2)]
    J1 = mean(adv[0] * lap_u[0] + adv[1] * lap_u[1])

    # J2: -2 lam (d_l u_k)(d_l d_k Q) : H
    acc = 0.0
    for l in range(2):
        for k in range(2):
            acc = acc + G[k][l] * 2.0 * (d2p[l][k] * H.p + d2q[l][k] * H.q)
    J2 = -2.0 * lam * L * mean(acc)

    # J3: (lam/L) u . grad F(Q) : H
    acc = 0.0
    for k in range(2):
        acc = acc + uc[k] * 2.0 * (dfp[k] * H.p + dfq[k] * H.q)
    J3 = lam * mean(acc)

    # J4: -2 lam (d_j u_i)(d_l Q_kj d_l H_ik - d_l Q_ik d_l H_kj)
    acc = 0.0
    for i in range(2):
        for j in range(2):
            inner = 0.0
            for l in range(2):
                for k in range(2):
                    inner = inner + dQ[l][k][j] * dH[l][i][k] - dQ[l][i][k] * dH[l][k][j]
            acc = acc + G[i][j] * inner
    J4 = -2.0 * lam * L * mean(acc)

    # J5: -lam (d_j u_i)(Lap Q_kj H_ik - Lap Q_ik H_kj)
    acc = 0.0
    for i in range(2):
        for j in range(2):
            inner = 0.0
            for k in range(2):
                inner = inner + lapQ[k][j] * Hm[i][k] - lapQ[i][k] * Hm[k][j]
            acc = acc + G[i][j] * inner
    J5 = -lam * L * mean(acc)

    # J6: lam xi (D LapQ + LapQ D) : H  (structurally zero in 2D)
    d11 = G[0][0]
    d22 = G[1][1]
    d12 = 0.5 * (G[0][1] + G[1][0])
    D = [[d11, d12], [d12, d22]]
    acc = 0.0
    for i in range(2):
        for j in range(2):
            entry = 0.0
            for k in range(2):
                entry = entry + D[i][k] * lapQ[k][j] + lapQ[i][k] * D[k][j]
            acc = acc + entry * Hm[i][j]
    J6 = lam * xi * L * mean(acc)

    # J7: 4 lam xi (d_l D_ik)(d_l Q_kj) H_ij  (structurally zero in 2D)
    dD = [
        [[0.5 * (d2u[i][k][l] + d2u[k][i][l]) for l in range(2)] for k in range(2)]
        for i in range(2)
    ]  # dD[i][k][l] = d_l D_ik
    acc = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    acc = acc + dD[i][k][l] * dQ[l][k][j] * Hm[i][j]
    J7 = 4.0 * lam * xi * L * mean(acc)

    # J8, J9: terms with Q_kl Q_ji contracted against grad u and H.
    # Expand Q = p E1 + q E2; only the scalar products p^2, pq, q^2 carry
    # derivatives, and E_a : H = 2(h_p, h_q), E_b : grad u = (e1, e2) below.
    e1 = G[0][0] - G[1][1]
    e2 = G[0][1] + G[1][0]
    pp_h = spectral.fwd(Q.p * Q.p)
    pq_h = spectral.fwd(Q.p * Q.q)
    qq_h = spectral.fwd(Q.q * Q.q)
    lap_pp = spectral.inv(spectral.lap_hat(pp_h))
    lap_pq = spectral.inv(spectral.lap_hat(pq_h))
    lap_qq = spectral.inv(spectral.lap_hat(qq_h))
    J8 = -4.0 * lam * xi * L * mean(
        lap_pp * H.p * e1 + lap_pq * (H.p * e2 + H.q * e1) + lap_qq * H.q * e2
    )

    e1h = spectral.fwd(e1)
    e2h = spectral.fwd(e2)
    acc = 0.0
    for m in range(2):
        dpp = spectral.inv(spectral.deriv_hat(pp_h, m))
        dpq = spectral.inv(spectral.deriv_hat(pq_h, m))
        dqq = spectral.inv(spectral.deriv_hat(qq_h, m))
        de1 = spectral.inv(spectral.deriv_hat(e1h, m))
        de2 = spectral.inv(spectral.deriv_hat(e2h, m))
        acc = acc + dpp * H.p * de1 + dpq * (H.p * de2 + H.q * de1) + dqq * H.q * de2
    J9 = -8.0 * lam * xi * L * mean(acc)

    # J10-J12: directional derivative of the bulk force against H
    advQ = advect_q(u, Q, dealias_output=False)
    dF_adv = linearized_F(Q, advQ, params)
    J10 = -lam * mean(contract_H((dF_adv.p, dF_adv.q)))

    gradu_t, D_t, Om_t = velocity_gradient(u)
    S = stretching(gradu_t, D_t, Om_t, Q, params, dealias_output=False)
    dF_S = linearized_F(Q, S, params)
    J11 = lam * mean(contract_H((dF_S.p, dF_S.q)))

    dF_H = linearized_F(Q, H, params)
    J12 = lam * gamma * mean(contract_H((dF_H.p, dF_H.q)))

    diss_visc = params.nu * mean(lap_u[0] ** 2 + lap_u[1] ** 2)
    diss_H = lam * gamma * L * mean(
        2.0 * (dhp[0] ** 2 + dhp[1] ** 2 + dhq[0] ** 2 + dhq[1] ** 2)
    )

    # general-L leftover of the stress/stretching cancellations:
    # R = -lam int div(tau + sigma) . Lap u dx, weighted by (1 - L)
    tau = stress_tau(Q, H, params, grad_q=(dp[0], dp[1], dq[0], dq[1]))
    sig = stress_sigma(Q, H)
    div1 = spectral.inv(
        spectral.deriv_hat(spectral.fwd(tau.t11), 0)
        + spectral.deriv_hat(spectral.fwd(tau.t12 + sig.t12), 1)
    )
    div2 = spectral.inv(
        spectral.deriv_hat(spectral.fwd(tau.t21 + sig.t21), 0)
        + spectral.deriv_hat(spectral.fwd(tau.t22), 1)
    )
    R = -lam * mean(div1 * lap_u[0] + div2 * lap_u[1])

    J = np.array([J1, J2, J3, J4, J5, J6, J7, J8, J9, J10, J11, J12])
    return J, (diss_visc, diss_H), R


def identity_residual(state: SimState, params: Parameters, dt_probe: float) -> float:
    """Relative defect of the dA/dt identity at the midpoint of two probe
    steps: |(1/2)(A(t+2dt)-A(t))/(2dt) + dissipation - sum_i J_i| / (1+|sum J_i|).

    Exact in the continuum; the measured residual is O(dt_probe) from the
    first-order probe scheme plus the spatial-aliasing floor.
    """
    if not dt_probe > 0:
        raise ValueError(f"dt_probe must be > 0, got {dt_probe}")
    s0 = state.copy()
    s1 = step(s0, dt_probe, params)
    s2 = step(s1, dt_probe, params)
    A0 = higher_energy_A(s0, params)
    A2 = higher_energy_A(s2, params)
    J, (dv, dh), R = identity_terms(s1, params)
    lhs = 0.5 * (A2 - A0) / (2.0 * dt_probe) + dv + dh
    rhs_sum = float(J.sum()) + (1.0 - params.L) * R
    return abs(lhs - rhs_sum) / (1.0 + abs(rhs_sum))


# ----------------------------------------------------------------------
# long-time behavior

def omega_limit_check(state: SimState, params: Parameters, tol_u: float, tol_H: float) -> bool:
    """True iff ||u||_{H^1} <= tol_u and ||H(Q)||_{L^2} <= tol_H."""
    if not (tol_u > 0 and tol_H > 0):
        raise ValueError("tolerances must be positive")
    if u_h1(state.u) > tol_u:
        return False
    return math.sqrt(h_l2sq(state.Q, params)) <= tol_H


def bulk_hessian_max(Q: QTensorField, params: Parameters) -> float:
    """max over the grid of the spectral norm of the bulk Hessian f_B''.

    In (p, q) coordinates the Hessian eigenvalues are 2a + 4c r^2 and
    2a + 12c r^2 with r^2 = p^2 + q^2.
    """
    r2 = Q.p**2 + Q.q**2
    lo = np.abs(2.0 * params.a + 4.0 * params.c * r2)
    hi = np.abs(2.0 * params.a + 12.0 * params.c * r2)
    return float(np.maximum(lo, hi).max())


def suggested_mu(params: Parameters, c2: float) -> float:
    """mu >= 2 + 2 lam C2 makes the Lyapunov functional Y nonnegative and
    equivalent to ||u||^2 + ||Q - Qinf||_{H^1}^2."""
    return 2.0 + 2.0 * params.lam * c2


def lyapunov_Y(state: SimState, Qinf: QTensorField, mu: float, params: Parameters) -> float:
    """Y = (1/2)||u||^2 + (lam L/2)||grad(Q-Qinf)||^2 + (mu/2)||Q-Qinf||^2
    + lam int [f_B(Q) - f_B(Qinf) - f_B'(Qinf):(Q-Qinf)] dx.

    Qinf must satisfy ||H(Qinf)|| <= 1e-8.
    """
    res = math.sqrt(h_l2sq(Qinf, params))
    if res > 1e-8:
        raise ValueError(f"Qinf is not an equilibrium: ||H(Qinf)|| = {res:.3e} > 1e-8")
    dp = state.Q.p - Qinf.p
    dq = state.Q.q - Qinf.q
    kin = 0.5 * float(np.mean(state.u.u1**2 + state.u.u2**2))
    grad_term = 0.5 * params.lam * params.L * 2.0 * (grad_l2sq(dp) + grad_l2sq(dq))
    l2_term = 0.5 * mu * float(np.mean(2.0 * (dp**2 + dq**2)))
    fb_prime = bulk_force(Qinf, params)  # = -f_B'(Qinf)
    excess = (
        bulk_density(state.Q, params)
        - bulk_density(Qinf, params)
        + 2.0 * (fb_prime.p * dp + fb_prime.q * dq)
    )
    return kin + grad_term + l2_term + params.lam * float(excess.mean())


@dataclass(frozen=True)
class RateFit:
    """Result of fitting a decaying norm series against the polynomial model
    y ~ (1+t)^s (Lojasiewicz exponent theta from s = -theta/(1-2 theta)) and
    the exponential model y ~ exp(-rate t)."""

    theta_hat: float
    poly_slope: float
    exp_rate: float
    model_preference: str  # "polynomial" | "exponential"
    poly_ssr: float
    exp_ssr: float
    out_of_theory: bool
    refused: bool = False
    reason: str = ""


def fit_convergence_rate(t: Sequence[float], y: Sequence[float], min_samples: int = 20) -> RateFit:
    """Least-squares fits of log y against log(1+t) and against t.

    theta_hat inverts the slope map s = -theta/(1-2 theta) as
    theta = s/(2s-1), reported as a magnitude; values outside (0, 1/2) are
    reported raw with the out-of-theory flag, never clamped.  Refuses
    (flag, no exception) on short or non-decaying series.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)

    def refused(reason):
        return RateFit(math.nan, math.nan, math.nan, "none", math.nan, math.nan, False, True, reason)

    if len(t) < min_samples:
        return refused(f"need >= {min_samples} samples, got {len(t)}")
    if np.any(y <= 0):
        return refused("series has non-positive values")
    if y[-1] >= y[0]:
        return refused("series is not decaying")

    ly = np.log(y)

    def lstsq_line(x):
        Amat = np.column_stack([np.ones_like(x), x])
        coef, *_ = np.linalg.lstsq(Amat, ly, rcond=None)
        ssr = float(np.sum((Amat @ coef - ly) ** 2))
        return coef[1], ssr

    poly_slope, poly_ssr = lstsq_line(np.log1p(t))
    exp_slope, exp_ssr = lstsq_line(t)
    s = poly_slope
    theta = abs(s / (2.0 * s - 1.0)) if abs(2.0 * s - 1.0) > 1e-300 else math.inf
    model = "polynomial" if poly_ssr <= exp_ssr else "exponential"
    return RateFit(
        theta_hat=theta,
        poly_slope=s,
        exp_rate=-exp_slope,
        model_preference=model,
        poly_ssr=poly_ssr,
        exp_ssr=exp_ssr,
        out_of_theory=not (0.0 < theta < 0.5),
    )


# ----------------------------------------------------------------------
# sampling

@dataclass
class DiagnosticsRow:
    """One sampled record; serialized to one CSV row in field order."""

    t: float
    E_total: float
    E_kinetic: float
    E_elastic: float
    E_bulk: float
    grad_u_L2sq: float
    H_L2sq: float
    A: float
    B: float
    div_u_max: float
    Q_Linf: float
    u_H1: float
    Q_minus_Qinf_H2: float
    energy_residual: float


CSV_FIELDS = [f.name for f in dataclass_fields(DiagnosticsRow)]


def sample_row(
    state: SimState,
    params: Parameters,
    prev_row: Optional[DiagnosticsRow] = None,
    q_ref: Optional[QTensorField] = None,
) -> DiagnosticsRow:
    """Measure one DiagnosticsRow.

    energy_residual is the trapezoid defect of the energy law against the
    previous sample, (E - E_prev)/(t - t_prev) + (diss + diss_prev)/2; NaN on
    the first sample.  Q_minus_Qinf_H2 is NaN unless a reference is given.
    """
    eb = total_energy(state, params)
    gu = grad_u_l2sq(state.u)
    hh = h_l2sq(state.Q, params)
    A = gu + params.lam * hh
    diss = params.nu * gu + params.lam * params.gamma * hh
    if prev_row is not None and state.t > prev_row.t:
        prev_diss = (
            params.nu * prev_row.grad_u_L2sq + params.lam * params.gamma * prev_row.H_L2sq
        )
        resid = (eb.total - prev_row.E_total) / (state.t - prev_row.t) + 0.5 * (diss + prev_diss)
    else:
        resid = math.nan
    return DiagnosticsRow(
        t=state.t,
        E_total=eb.total,
        E_kinetic=eb.kinetic,
        E_elastic=eb.elastic,
        E_bulk=eb.bulk,
        grad_u_L2sq=gu,
        H_L2sq=hh,
        A=A,
        B=math.e + math.log(math.e + A),
        div_u_max=spectral.divergence_max(state.u),
        Q_Linf=float(np.sqrt(tr_q2(state.Q)).max()),
        u_H1=u_h1(state.u),
        Q_minus_Qinf_H2=(q_h2_dist(state.Q, q_ref) if q_ref is not None else math.nan),
        energy_residual=resid,
    )


def reconstruct_pressure(state: SimState, params: Parameters) -> np.ndarray:
    """Optional diagnostic: P with -Lap P = div(u.grad u - lam div(tau+sigma)),
    zero-mean convention.  The pressure is eliminated from the dynamics by
    projection; this recovers it for inspection."""
    from .coupling import _elastic_force_hat

    gradu, _, _ = velocity_gradient(state.u)
    adv1 = state.u.u1 * gradu.t11 + state.u.u2 * gradu.t12
    adv2 = state.u.u1 * gradu.t21 + state.u.u2 * gradu.t22
    f1, f2 = _elastic_force_hat(state.Q, params)
    g1 = spectral.fwd(adv1) - f1
    g2 = spectral.fwd(adv2) - f2
    n = state.grid.n
    K1, K2 = spectral.wavenumbers(n)
    div_hat = TWO_PI * 1j * (K1 * g1 + K2 * g2)
    k2 = (TWO_PI**2) * spectral.ksq(n).copy()
    k2[0, 0] = 1.0
    Ph = div_hat / k2
    Ph[0, 0] = 0.0
    return spectral.inv(Ph)

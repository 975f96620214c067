"""IMEX time integration of the coupled system.

First-order splitting: all transport, stretching, stress and bulk-reaction
terms are advanced by forward Euler; the stiff linear diffusions nu Lap u
and Gamma L Lap Q are folded in implicitly afterwards (diagonal Helmholtz
solves in Fourier space).  The velocity is Leray-projected after the
implicit solve, so divergence-freeness holds to spectral precision at the
end of every step.  The state is kept band-limited to the 2/3 ball by
dealiasing the assembled explicit tendencies.

A provably first-order scheme keeps Richardson checks of the energy law and
of the higher-order identity clean; see diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import spectral
from .spectral import TWO_PI
from .coupling import advect_q, stretching
from .energetics import bulk_force, molecular_field
from .fields import Parameters, QTensorField, SimState, VelocityField, tr_q2

__all__ = ["StepperConfig", "BlowUpError", "rhs", "step", "cfl_dt", "run"]

BLOWUP_MAX = 1e6


@dataclass(frozen=True)
class StepperConfig:
    """Time-loop settings.

    dt is the base (and maximum) step; with adaptive=True each step is
    shortened to the stability estimate from cfl_dt.  sample_every is the
    observer cadence in steps.
    """

    dt: float
    t_end: float
    cfl: float = 0.5
    adaptive: bool = True
    sample_every: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must be in (0, 1], got {self.cfl}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if self.sample_every < 1:
            raise ValueError(f"sample_every must be >= 1, got {self.sample_every}")


class BlowUpError(RuntimeError):
    """Raised when a field exceeds the blow-up threshold or turns non-finite.

    The continuous problem has global bounded solutions, so reaching this
    signals a numerical problem (usually dt too large), not physics.  Carries
    the last valid state for checkpointing.
    """

    def __init__(self, message: str, state: SimState, term: str):
        super().__init__(message)
        self.state = state
        self.term = term


def _check_finite(name: str, state: SimState, *arrays: np.ndarray):
    for arr in arrays:
        if not np.isfinite(arr).all():
            raise BlowUpError(f"non-finite values in {name} at t={state.t}", state, name)


def _explicit_hats(state: SimState, params: Parameters, check_terms: bool = True):
    """Dealiased Fourier tendencies of the explicit terms.

    Returns (e_u1, e_u2, e_p, e_q, state_hats) with
      e_u = P[-u.grad u + lam div(tau+sigma)]
      e_Q = -u.grad Q + S(grad u, Q) + Gamma (-a Q - c tr(Q^2) Q)
    i.e. everything except the implicit diffusions.  All transforms are
    batched over field stacks; the term formulas live in coupling and
    energetics and are reused here on precomputed derivatives.
    """
    from .coupling import Tensor2Field, stress_sigma, stress_tau

    u, Q = state.u, state.Q
    grid = state.grid
    sym = spectral.rsymbols(grid.n)
    chk = _check_finite if check_terms else (lambda *a: None)
    d1, d2, lap_sym = sym["d1"], sym["d2"], -(TWO_PI**2) * sym["k2sum"]

    phys4 = np.empty((4, grid.n, grid.n))
    phys4[0], phys4[1], phys4[2], phys4[3] = u.u1, u.u2, Q.p, Q.q
    state_hats = spectral.rfwd(phys4)
    u1h, u2h, ph, qh = state_hats

    spec = np.empty((10,) + u1h.shape, dtype=complex)
    np.multiply(d1, u1h, out=spec[0])
    np.multiply(d2, u1h, out=spec[1])
    np.multiply(d1, u2h, out=spec[2])
    np.multiply(d2, u2h, out=spec[3])
    np.multiply(d1, ph, out=spec[4])
    np.multiply(d2, ph, out=spec[5])
    np.multiply(d1, qh, out=spec[6])
    np.multiply(d2, qh, out=spec[7])
    np.multiply(lap_sym, ph, out=spec[8])
    np.multiply(lap_sym, qh, out=spec[9])
    g11, g12, g21, g22, px, py, qx, qy, lap_p, lap_q = spectral.rinv(spec)
    chk("velocity gradient", state, g11, g12, g21, g22)

    gradu = Tensor2Field(g11, g12, g21, g22, grid)
    d12 = 0.5 * (g12 + g21)
    D = Tensor2Field(g11, d12, d12, g22, grid)
    w = 0.5 * (g12 - g21)
    Omega = Tensor2Field(np.zeros_like(w), w, -w, grid.zeros(), grid)
    grad_q = (px, py, qx, qy)

    H = molecular_field(Q, params, lap=(lap_p, lap_q))
    chk("molecular field", state, H.p, H.q)

    adv1 = u.u1 * g11 + u.u2 * g12
    adv2 = u.u1 * g21 + u.u2 * g22
    chk("velocity advection", state, adv1, adv2)

    tau = stress_tau(Q, H, params, grad_q=grad_q)
    sig = stress_sigma(Q, H)
    S = stretching(gradu, D, Omega, Q, params, dealias_output=False)
    advQ = advect_q(u, Q, grad_q=grad_q, dealias_output=False)
    g = bulk_force(Q, params)

    phys = np.empty((8, grid.n, grid.n))
    np.negative(adv1, out=phys[0])
    np.negative(adv2, out=phys[1])
    phys[2], phys[3] = tau.t11, tau.t12 + sig.t12
    phys[4], phys[5] = tau.t21 + sig.t21, tau.t22
    np.subtract(S.p, advQ.p, out=phys[6])
    phys[6] += params.gamma * g.p
    np.subtract(S.q, advQ.q, out=phys[7])
    phys[7] += params.gamma * g.q
    hats = spectral.rfwd(phys)
    hats *= sym["mask"]
    # lam div(tau + sigma); the k=0 mode of a divergence vanishes exactly
    f1 = params.lam * (d1 * hats[2] + d2 * hats[3])
    f2 = params.lam * (d1 * hats[4] + d2 * hats[5])
    e_u1, e_u2 = spectral.rproject(hats[0] + f1, hats[1] + f2)
    return e_u1, e_u2, hats[6], hats[7], state_hats


def rhs(state: SimState, params: Parameters):
    """Full instantaneous tendency (du, dQ), diffusion included.

    du = P[-u.grad u + lam div(tau+sigma)] + nu Lap u
    dQ = -u.grad Q + S(grad u, Q) + Gamma H(Q)
    In the stepper the Laplacians are treated implicitly; here they are
    evaluated so steady states give exactly zero.
    """
    e_u1, e_u2, e_p, e_q, (u1h, u2h, ph, qh) = _explicit_hats(state, params)
    lap_sym = -(TWO_PI**2) * spectral.rsymbols(state.grid.n)["k2sum"]
    gL = params.gamma * params.L
    du1, du2, dp, dq = spectral.rinv(np.stack([
        e_u1 + params.nu * lap_sym * u1h,
        e_u2 + params.nu * lap_sym * u2h,
        e_p + gL * lap_sym * ph,
        e_q + gL * lap_sym * qh,
    ]))
    _check_finite("rhs", state, du1, du2, dp, dq)
    return VelocityField(du1, du2, state.grid), QTensorField(dp, dq, state.grid)


def step(state: SimState, dt: float, params: Parameters) -> SimState:
    """One IMEX Euler step: explicit terms forward, diffusion via
    (I - nu dt Lap) and (I - Gamma L dt Lap) solves, then re-projection."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    e_u1, e_u2, e_p, e_q, (u1h, u2h, ph, qh) = _explicit_hats(state, params, check_terms=False)
    ksum = spectral.rsymbols(state.grid.n)["k2sum"]

    den_u = 1.0 + params.nu * dt * TWO_PI**2 * ksum
    u1h = (u1h + dt * e_u1) / den_u
    u2h = (u2h + dt * e_u2) / den_u
    u1h, u2h = spectral.rproject(u1h, u2h)

    den_q = 1.0 + params.gamma * params.L * dt * TWO_PI**2 * ksum
    ph = (ph + dt * e_p) / den_q
    qh = (qh + dt * e_q) / den_q

    out4 = np.empty((4,) + u1h.shape, dtype=complex)
    out4[0], out4[1], out4[2], out4[3] = u1h, u2h, ph, qh
    u1, u2, p, q = spectral.rinv(out4)
    new = SimState(
        state.t + dt,
        VelocityField(u1, u2, state.grid),
        QTensorField(p, q, state.grid),
    )
    amax = max(
        float(np.abs(new.u.u1).max()),
        float(np.abs(new.u.u2).max()),
        float(np.abs(new.Q.p).max()),
        float(np.abs(new.Q.q).max()),
    )
    if not np.isfinite(amax) or amax > BLOWUP_MAX:
        raise BlowUpError(
            f"blow-up: max field magnitude {amax:.3e} after step to t={new.t}",
            state,
            "state magnitude",
        )
    return new


def cfl_dt(state: SimState, params: Parameters, config: StepperConfig) -> float:
    """Stable step estimate, scaled by the cfl factor and capped by config.dt.

    Three explicit mechanisms limit the step: advection (dx/|u|), the bulk
    reaction (1/(Gamma(|a| + 3 c max tr(Q^2)))), and the stress/stretching
    coupling.  The last one is an elastic oscillation between u and Q at
    frequency w ~ sqrt(lam L tr) kappa per squared wavenumber kappa; forward
    Euler on that skew pair is stabilized only by the implicit diffusions,
    giving dt <= (nu + Gamma L) / (lam L kappa_max tr_max) with kappa_max =
    8 pi^2 (n/3)^2 the largest retained squared wavenumber (measured scaling;
    see the verification report).
    """
    dx = state.grid.dx
    u_max = max(float(np.abs(state.u.u1).max()), float(np.abs(state.u.u2).max()))
    tr_max = float(tr_q2(state.Q).max())

    bounds = [1.0 / (params.gamma * (abs(params.a) + 3.0 * params.c * tr_max))]
    if tr_max > 0:
        kappa_max = 2.0 * (TWO_PI * state.grid.n / 3.0) ** 2
        bounds.append(
            (params.nu + params.gamma * params.L)
            / (params.lam * params.L * kappa_max * tr_max)
        )
    if u_max > 0:
        bounds.append(dx / u_max)
        # stretching acts like a local rate ~ |grad u| (1+|xi|)(1+|Q|);
        # |grad u| is estimated by u_max/dx on the resolved scales
        rate = (u_max / dx) * (1.0 + abs(params.xi)) * (1.0 + np.sqrt(tr_max))
        bounds.append(1.0 / rate)
    return min(config.dt, config.cfl * min(bounds))


def run(
    state: SimState,
    params: Parameters,
    config: StepperConfig,
    observer: Optional[Callable] = None,
    q_ref: Optional[QTensorField] = None,
) -> SimState:
    """Advance until t >= t_end or the observer requests a stop.

    The observer is called as observer(state, row) with a DiagnosticsRow at
    step 0, every sample_every-th step, and at the final step; a truthy
    return stops the run.  Observers must not mutate the state.
    """
    from . import diagnostics  # deferred: diagnostics uses step() for probes

    prev_row = None

    def emit(s: SimState):
        nonlocal prev_row
        row = diagnostics.sample_row(s, params, prev_row=prev_row, q_ref=q_ref)
        prev_row = row
        if observer is not None:
            return observer(s, row)
        return None

    if emit(state):
        return state
    nstep = 0
    while state.t < config.t_end - 1e-14:
        dt = cfl_dt(state, params, config) if config.adaptive else config.dt
        dt = min(dt, config.t_end - state.t)
        state = step(state, dt, params)
        nstep += 1
        last = state.t >= config.t_end - 1e-14
        if nstep % config.sample_every == 0 or last:
            if emit(state):
                break
    return state

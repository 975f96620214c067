"""Self-verification battery behind the `verify` subcommand.

Each check pins one contract of the solver: transform/projection algebra,
the variational relation between H and the free energy, the energy lower
bound, the first-order convergence of the energy-law defect, the
higher-order identity residual, and the co-rotational (xi = 0) reduction.
The result is a machine-readable report; a corrupted formula anywhere in
the force/stress chain shows up as a failed energy or identity check.
"""

from __future__ import annotations

import math

import numpy as np

from . import coupling, diagnostics, energetics, spectral
from .config import RunConfig, initial_state
from .fields import Grid, Parameters, QTensorField, SimState, VelocityField
from .stepper import run, step

__all__ = ["run_all_checks"]


def _check(name, value, threshold, details=""):
    return {
        "name": name,
        "passed": bool(value <= threshold),
        "value": float(value),
        "threshold": float(threshold),
        "details": details,
    }


def _random_state(grid: Grid, params: Parameters, seed: int, u_amp=0.4, q_amp=0.4, kmax=6) -> SimState:
    """Band-limited random state: modes only up to |k_i| <= kmax."""
    rng = np.random.default_rng(seed)
    n = grid.n

    def band_limited():
        C = spectral.fwd(rng.standard_normal((n, n)))
        K1, K2 = spectral.wavenumbers(n)
        C[(np.abs(K1) > kmax) | (np.abs(K2) > kmax)] = 0.0
        C[0, 0] = 0.0
        f = spectral.inv(C)
        return f / max(np.abs(f).max(), 1e-300)

    psi = band_limited()
    ph = spectral.fwd(psi)
    u1 = spectral.inv(spectral.deriv_hat(ph, 1))
    u2 = -spectral.inv(spectral.deriv_hat(ph, 0))
    norm = math.sqrt(float(np.mean(u1**2 + u2**2)))
    if norm > 0:
        u1 *= u_amp / norm
        u2 *= u_amp / norm
    p = q_amp * band_limited()
    q = q_amp * band_limited()
    return SimState(0.0, VelocityField(u1, u2, grid), QTensorField(p, q, grid))


def _spectral_checks(grid: Grid, seed: int):
    checks = []
    n = grid.n
    rng = np.random.default_rng(seed)
    f = spectral.inv(spectral.dealias_hat(spectral.fwd(rng.standard_normal((n, n)))))
    rt = spectral.inv(spectral.fwd(f))
    checks.append(_check(
        "spectral_roundtrip",
        np.abs(rt - f).max() / max(np.abs(f).max(), 1e-300),
        1e-12,
    ))

    x1, x2 = grid.coords()
    s = np.sin(2 * np.pi * x1) * np.sin(2 * np.pi * x2)
    lap = spectral.inv(spectral.lap_hat(spectral.fwd(s)))
    checks.append(_check(
        "derivative_exactness",
        np.abs(lap + 8 * np.pi**2 * s).max() / (8 * np.pi**2),
        1e-12,
        "Lap sin(2pi x1) sin(2pi x2) = -8 pi^2 sin sin",
    ))

    # dealiased product vs product on a 2x finer grid, truncated back
    def band(kmax):
        C = spectral.fwd(rng.standard_normal((n, n)))
        K1, K2 = spectral.wavenumbers(n)
        C[(np.abs(K1) > kmax) | (np.abs(K2) > kmax)] = 0.0
        return spectral.inv(C)

    kb = n // 3
    a = band(kb)
    b = band(kb)
    coarse = spectral.inv(spectral.dealias_hat(spectral.fwd(a * b)))
    fine = spectral.resample(a, 2 * n) * spectral.resample(b, 2 * n)
    fine_back = spectral.inv(spectral.dealias_hat(spectral.fwd(spectral.resample(fine, n))))
    checks.append(_check(
        "dealias_fine_grid_oracle",
        np.abs(coarse - fine_back).max() / max(np.abs(fine_back).max(), 1e-300),
        1e-12,
    ))

    u = VelocityField(rng.standard_normal((n, n)), rng.standard_normal((n, n)), grid)
    Pu = spectral.leray_project(u)
    PPu = spectral.leray_project(Pu)
    scale = max(1.0, math.sqrt(float(np.mean(Pu.u1**2 + Pu.u2**2))))
    checks.append(_check("leray_divergence", spectral.divergence_max(Pu) / scale, 1e-12))
    checks.append(_check(
        "leray_idempotent",
        max(np.abs(PPu.u1 - Pu.u1).max(), np.abs(PPu.u2 - Pu.u2).max()) / scale,
        1e-12,
    ))
    v = VelocityField(rng.standard_normal((n, n)), rng.standard_normal((n, n)), grid)
    Pv = spectral.leray_project(v)
    lhs = float(np.mean(Pu.u1 * v.u1 + Pu.u2 * v.u2))
    rhs = float(np.mean(u.u1 * Pv.u1 + u.u2 * Pv.u2))
    checks.append(_check("leray_self_adjoint", abs(lhs - rhs), 1e-12))

    g = band(kb)
    alpha = 0.37
    sol = spectral.inv(spectral.helmholtz_hat(spectral.fwd(g), alpha))
    resid = sol - alpha * spectral.inv(spectral.lap_hat(spectral.fwd(sol))) - g
    checks.append(_check(
        "helmholtz_residual",
        np.abs(resid).max() / max(np.abs(g).max(), 1e-300),
        1e-12,
    ))
    return checks


def _variational_check(grid: Grid, params: Parameters, seed: int, pairs=20):
    rng = np.random.default_rng(seed)
    n = grid.n
    worst = 0.0
    eps = 1e-4
    for _ in range(pairs):
        state = _random_state(grid, params, rng.integers(2**31), q_amp=0.5)
        Q = state.Q
        dstate = _random_state(grid, params, rng.integers(2**31), q_amp=0.3)
        dQ = dstate.Q
        H = energetics.molecular_field(Q, params)
        pairing = float(np.mean(-2.0 * (H.p * dQ.p + H.q * dQ.q)))
        Qp = QTensorField(Q.p + eps * dQ.p, Q.q + eps * dQ.q, grid)
        Qm = QTensorField(Q.p - eps * dQ.p, Q.q - eps * dQ.q, grid)
        fd = (energetics.free_energy(Qp, params) - energetics.free_energy(Qm, params)) / (2 * eps)
        worst = max(worst, abs(pairing - fd) / (1.0 + abs(fd)))
    return [_check("variational_consistency", worst, 1e-6, f"{pairs} random (Q, dQ) pairs, eps={eps}")]


def _lower_bound_check(grid: Grid, params: Parameters, seed: int):
    rng = np.random.default_rng(seed)
    bound = energetics.energy_lower_bound(params)
    worst = -math.inf
    for _ in range(10):
        state = _random_state(grid, params, rng.integers(2**31), u_amp=1.0, q_amp=1.5)
        e = diagnostics.total_energy(state, params).total
        worst = max(worst, bound - e)
    return [_check("energy_lower_bound", worst, 0.0, f"bound {bound:.6g}")]


def _spin_up(state: SimState, params: Parameters, t_spin=0.1, dt=2e-4) -> SimState:
    """Evolve briefly so the stiff spectral transient of raw random data has
    decayed; residual sweeps then probe the smooth regime the identities
    describe."""
    s = state.copy()
    while s.t < t_spin - 1e-12:
        s = step(s, dt, params)
    return s


def _energy_law_sweep(state0: SimState, params: Parameters, dts=(1e-3, 5e-4, 2.5e-4), nsteps=16):
    maxrel = []
    for dt in dts:
        s = state0.copy()
        ts, Es, ds = [], [], []
        for _ in range(nsteps):
            ts.append(s.t)
            Es.append(diagnostics.total_energy(s, params).total)
            ds.append(diagnostics.dissipation(s, params))
            s = step(s, dt, params)
        _, rel = diagnostics.energy_law_residual(ts, Es, ds)
        maxrel.append(rel)
    checks = [
        _check(
            f"energy_law_ratio_dt{dts[i]:g}",
            maxrel[i + 1] / maxrel[i],
            0.6,
            f"residual {maxrel[i]:.3e} -> {maxrel[i + 1]:.3e}",
        )
        for i in range(len(dts) - 1)
    ]
    checks.append(_check("energy_law_residual_finest", maxrel[-1], 1e-3))
    return checks


def _identity_sweep(state0: SimState, params: Parameters, probes=(1e-4, 5e-5, 2.5e-5)):
    res = [diagnostics.identity_residual(state0, params, dt) for dt in probes]
    checks = [
        _check(
            f"identity_ratio_dt{probes[i]:g}",
            res[i + 1] / res[i],
            0.75,
            f"residual {res[i]:.3e} -> {res[i + 1]:.3e}",
        )
        for i in range(len(probes) - 1)
    ]
    checks.append(_check("identity_residual_finest", res[-1], 1e-3))
    return checks


def _xi0_check(state0: SimState, params: Parameters):
    params0 = Parameters(params.nu, params.lam, params.gamma, params.L, params.a, params.c, 0.0)
    J, _, _ = diagnostics.identity_terms(state0, params0)
    value = float(np.abs(J[5:9]).max())  # J6..J9
    return [_check("xi0_reduction_J6_J9", value, 1e-12)]


def _structure_checks(state0: SimState, params: Parameters):
    checks = []
    s = state0.copy()
    for _ in range(3):
        s = step(s, 1e-3, params)
    unorm = max(1.0, math.sqrt(float(np.mean(s.u.u1**2 + s.u.u2**2))))
    checks.append(_check("stepped_divergence_free", spectral.divergence_max(s.u) / unorm, 1e-12))
    f = coupling.elastic_force(s.Q, params)
    checks.append(_check(
        "elastic_force_zero_mean",
        max(abs(float(f.u1.mean())), abs(float(f.u2.mean()))),
        1e-12,
    ))
    return checks


def run_all_checks(config: RunConfig) -> dict:
    grid = Grid(config.grid_n)
    params = config.params
    checks = []
    checks += _spectral_checks(grid, seed=config.velocity_seed + 100)
    checks += _variational_check(grid, params, seed=config.q_seed + 200)
    checks += _lower_bound_check(grid, params, seed=config.q_seed + 300)

    state0 = _spin_up(initial_state(config), params)
    checks += _energy_law_sweep(state0, params)
    checks += _identity_sweep(state0, params)
    checks += _xi0_check(_random_state(grid, params, seed=config.velocity_seed + 400), params)
    checks += _structure_checks(state0, params)

    return {"passed": all(c["passed"] for c in checks), "checks": checks}

import numpy as np
import pytest

from beqt2d import spectral
from beqt2d.fields import Grid, Parameters, QTensorField, SimState, VelocityField
from beqt2d.spectral import TWO_PI
from beqt2d.stepper import BlowUpError, StepperConfig, cfl_dt, rhs, run, step

from conftest import random_state

EQ = np.sqrt(0.5)


def equilibrium_state(grid):
    return SimState(0.0, VelocityField.zeros(grid), QTensorField.constant(grid, EQ, 0.0))


def test_rhs_zero_at_steady_state(grid64, params):
    du, dQ = rhs(equilibrium_state(grid64), params)
    assert np.abs(du.u1).max() <= 1e-12 and np.abs(du.u2).max() <= 1e-12
    assert np.abs(dQ.p).max() <= 1e-12 and np.abs(dQ.q).max() <= 1e-12


def test_rhs_linearization_scaling(grid64, params):
    # Q = equilibrium + eps X: ||dQ|| = O(eps)
    rng = np.random.default_rng(0)
    X = random_state(rng, grid64, kmax=4, q_amp=1.0).Q
    norms = []
    for eps in (1e-3, 1e-4, 1e-5):
        s = SimState(
            0.0,
            VelocityField.zeros(grid64),
            QTensorField(EQ + eps * X.p, eps * X.q, grid64),
        )
        _, dQ = rhs(s, params)
        norms.append(np.sqrt(np.mean(2 * (dQ.p**2 + dQ.q**2))))
    assert norms[1] / norms[0] == pytest.approx(0.1, rel=0.05)
    assert norms[2] / norms[1] == pytest.approx(0.1, rel=0.05)


def test_step_fixed_point(grid64, params):
    s0 = equilibrium_state(grid64)
    s1 = step(s0, 1e-2, params)
    assert np.abs(s1.u.u1).max() <= 1e-12
    assert np.abs(s1.Q.p - s0.Q.p).max() <= 1e-12
    assert s1.t == pytest.approx(1e-2)


def test_step_pure_heat_symbol(grid64):
    # u = 0, a = 0, c -> 0: each Q mode decays by 1/(1 + Gamma L dt 4 pi^2 |k|^2)
    params = Parameters(a=0.0, c=1e-30)
    rng = np.random.default_rng(1)
    Q = random_state(rng, grid64, kmax=8, q_amp=1e-3).Q
    s0 = SimState(0.0, VelocityField.zeros(grid64), Q)
    dt = 1e-3
    s1 = step(s0, dt, params)
    C0 = spectral.fwd(s0.Q.p)
    C1 = spectral.fwd(s1.Q.p)
    sym = 1.0 / (1.0 + params.gamma * params.L * dt * TWO_PI**2 * spectral.ksq(64))
    assert np.abs(C1 - sym * C0).max() <= 1e-12 * np.abs(C0).max()


def test_step_first_order_consistency(grid64, params):
    # dt must resolve the stiffest retained mode (dt * nu * 4 pi^2 k^2 < 1)
    # for the asymptotic O(dt^2) one-step/two-half-step gap to show
    rng = np.random.default_rng(2)
    s0 = random_state(rng, grid64, kmax=4, u_amp=0.3, q_amp=0.3)

    def gap(dt):
        one = step(s0, dt, params)
        half = step(step(s0, dt / 2, params), dt / 2, params)
        return max(
            np.abs(one.u.u1 - half.u.u1).max(),
            np.abs(one.Q.p - half.Q.p).max(),
        )

    g1, g2 = gap(1e-4), gap(5e-5)
    assert g2 <= 0.35 * g1  # O(dt^2) gap between one step and two half-steps


def test_step_rejects_bad_dt(grid64, params):
    with pytest.raises(ValueError):
        step(equilibrium_state(grid64), 0.0, params)


def test_cfl_dt_quiescent(grid64, params):
    config = StepperConfig(dt=0.5, t_end=1.0, cfl=0.5)
    s = SimState(0.0, VelocityField.zeros(grid64), QTensorField.zeros(grid64))
    # only the reaction bound is active: cfl / (Gamma |a|)
    assert cfl_dt(s, params, config) == pytest.approx(min(0.5, 0.5 / abs(params.a)))
    config2 = StepperConfig(dt=0.1, t_end=1.0, cfl=0.5)
    assert cfl_dt(s, params, config2) == pytest.approx(0.1)


def test_cfl_dt_advective_scaling(grid64, params):
    rng = np.random.default_rng(3)
    s = random_state(rng, grid64, kmax=3, u_amp=50.0, q_amp=0.1)  # advection-dominated
    s2 = SimState(0.0, VelocityField(2 * s.u.u1, 2 * s.u.u2, grid64), s.Q)
    config = StepperConfig(dt=1.0, t_end=1.0, cfl=0.5)
    assert cfl_dt(s2, params, config) == pytest.approx(0.5 * cfl_dt(s, params, config), rel=0.2)


def test_cfl_validation():
    with pytest.raises(ValueError):
        StepperConfig(dt=0.1, t_end=1.0, cfl=0.0)
    with pytest.raises(ValueError):
        StepperConfig(dt=-0.1, t_end=1.0)


def test_run_zero_time(grid64, params):
    s0 = equilibrium_state(grid64)
    calls = []
    out = run(s0, params, StepperConfig(dt=1e-3, t_end=0.0), observer=lambda s, r: calls.append(r))
    assert out.t == 0.0
    assert len(calls) == 1  # initial sample only


def test_run_energy_monotone(grid64, params):
    rng = np.random.default_rng(4)
    s0 = random_state(rng, grid64, kmax=8, u_amp=0.4, q_amp=0.3)
    rows = []
    run(s0, params, StepperConfig(dt=2e-3, t_end=0.5, sample_every=5),
        observer=lambda s, r: rows.append(r))
    E = [r.E_total for r in rows]
    for a, b in zip(E, E[1:]):
        assert b <= a + 1e-8 * (1 + abs(a))


def test_run_observer_stop(grid64, params):
    s0 = random_state(np.random.default_rng(5), grid64, kmax=4, u_amp=0.2, q_amp=0.2)
    seen = []

    def observer(s, row):
        seen.append(s.t)
        return len(seen) >= 3

    out = run(s0, params, StepperConfig(dt=1e-3, t_end=10.0, sample_every=2, adaptive=False), observer)
    assert len(seen) == 3
    assert out.t < 10.0


def test_blowup_raises_with_state(grid64, params):
    rng = np.random.default_rng(6)
    s0 = random_state(rng, grid64, kmax=6, u_amp=5.0, q_amp=2.0)
    with pytest.raises(BlowUpError) as info:
        s = s0
        for _ in range(200):
            s = step(s, 0.5, params)  # grossly unstable dt
    assert isinstance(info.value.state, SimState)
    assert np.isfinite(info.value.state.Q.p).all()


def test_structure_preserved_through_steps(grid64, params):
    rng = np.random.default_rng(7)
    s = random_state(rng, grid64, kmax=8, u_amp=0.5, q_amp=0.4)
    for _ in range(20):
        s = step(s, 1e-3, params)
        unorm = np.sqrt(np.mean(s.u.u1**2 + s.u.u2**2))
        assert spectral.divergence_max(s.u) <= 1e-12 * max(1.0, unorm)
    # tr(Q) = 0 and symmetry hold exactly by representation; mean velocity stays zero
    assert abs(spectral.fwd(s.u.u1)[0, 0]) <= 1e-14
    assert abs(spectral.fwd(s.u.u2)[0, 0]) <= 1e-14


def test_mode_truncation_consistency(params):
    # the same band-limited data stepped at n = 32, 48, 64 converges
    # spectrally to the finest solution
    rng = np.random.default_rng(8)
    s64 = random_state(rng, Grid(64), kmax=5, u_amp=0.3, q_amp=0.3)

    def evolve(n):
        import oracles

        s = oracles.refine_state(s64, n) if n != 64 else s64.copy()
        for _ in range(50):
            s = step(s, 1e-3, params)
        return oracles.refine_state(s, 64)

    a32, a48, a64 = evolve(32), evolve(48), evolve(64)
    d32 = np.abs(a32.Q.p - a64.Q.p).max() + np.abs(a32.u.u1 - a64.u.u1).max()
    d48 = np.abs(a48.Q.p - a64.Q.p).max() + np.abs(a48.u.u1 - a64.u.u1).max()
    assert d48 <= 0.3 * d32
    assert d48 <= 1e-5
